import json
import math

import numpy as np
import pytest

from emission import SpectralGrid, Spectrum
from errors import ConfigError
from spectrum_io import dumps, metadata_path, read_spectrum, write_json, write_spectrum


@pytest.fixture
def spectrum():
    grid = SpectralGrid(-1.0, 1.0, 0.25)
    values = np.exp(-grid.points ** 2) / 3
    return Spectrum(grid, values, 'emission', {'truncation': 12})


def test_write_then_read(tmp_path, spectrum):
    path = write_spectrum(spectrum, tmp_path / 'out' / 'emission.csv', {'label': 'ground'})
    assert path.exists() and metadata_path(path).exists()
    back = read_spectrum(path)
    assert back.kind == 'measured'
    assert back.grid.size == spectrum.grid.size
    assert back.grid.step == pytest.approx(0.25)
    np.testing.assert_allclose(back.values, spectrum.values, rtol=1e-11)
    assert back.meta['kind'] == 'emission'
    assert back.meta['truncation'] == 12 and back.meta['label'] == 'ground'
    assert back.meta['grid'] == {'delta_min': -1.0, 'delta_max': 1.0, 'step': 0.25}


def test_header_line(tmp_path, spectrum, settings):
    path = write_spectrum(spectrum, tmp_path / 'emission.csv')
    assert path.read_text().splitlines()[0] == settings.csv_header


def test_identical_inputs_give_identical_bytes(tmp_path, spectrum):
    first = write_spectrum(spectrum, tmp_path / 'a.csv', {'eta': 0.02})
    second = write_spectrum(spectrum, tmp_path / 'b.csv', {'eta': 0.02})
    assert first.read_bytes() == second.read_bytes()
    assert metadata_path(first).read_bytes() == metadata_path(second).read_bytes()


def test_spectrum_without_metadata(tmp_path, settings):
    path = tmp_path / 'measured.csv'
    path.write_text(f'{settings.csv_header}\n0.0,1.0\n0.5,2.0\n1.0,0.5\n')
    back = read_spectrum(path)
    assert back.meta == {'source': str(path)}
    np.testing.assert_array_equal(back.values, [1.0, 2.0, 0.5])


def test_unreadable_metadata_is_ignored(tmp_path, settings, caplog):
    path = tmp_path / 'measured.csv'
    path.write_text(f'{settings.csv_header}\n0.0,1.0\n0.5,2.0\n')
    metadata_path(path).write_text('{not json')
    back = read_spectrum(path)
    assert 'kind' not in back.meta
    assert 'ignoring' in caplog.text


@pytest.mark.parametrize('text', [
    '',
    'delta,S\n0.0,1.0\n0.5,1.0\n',
    '{header}\n0.0,1.0\n',
    '{header}\n0.0,1.0,2.0\n0.5,1.0,2.0\n',
    '{header}\n0.0,abc\n0.5,1.0\n',
    '{header}\n0.0,1.0\n0.1,1.0\n0.5,1.0\n',
    '{header}\n0.0,-1.0\n0.5,1.0\n',
])
def test_malformed_spectrum_files(tmp_path, settings, text):
    path = tmp_path / 'bad.csv'
    path.write_text(text.format(header=settings.csv_header))
    with pytest.raises(ConfigError):
        read_spectrum(path)


def test_missing_spectrum_file(tmp_path):
    with pytest.raises(ConfigError, match='cannot read'):
        read_spectrum(tmp_path / 'absent.csv')


def test_json_rounding(tmp_path):
    document = {'b': 1 / 3, 'a': [np.float64(2.0), math.nan, np.int64(4)], 'ok': np.bool_(True)}
    text = dumps(document)
    assert json.loads(text) == {'a': [2.0, None, 4], 'b': 0.333333333333, 'ok': True}
    assert text.index('"a"') < text.index('"b"')
    path = write_json(tmp_path / 'nested' / 'report.json', document)
    assert path.read_text() == text
