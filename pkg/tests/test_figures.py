import pytest

from errors import ConfigError
from figures import ETA, FIGURES, G0, NARROW_EPSILON, build_figure, figure_curves


def test_known_ids():
    assert sorted(FIGURES) == ['2a', '2b', '2c', '3', '4', '5a', '5b', '5c', '5d', '5e', '5f', '6a', '6b']
    with pytest.raises(ConfigError, match='unknown figure'):
        figure_curves('7')


def test_branch_preset_spans_three_branches():
    etas = [curve.system.eta for curve in figure_curves('4')]
    assert etas == pytest.approx([ETA - 1 / (2 * G0), ETA, ETA + 1 / (2 * G0)])
    assert len({curve.label for curve in figure_curves('4')}) == 3


def test_narrow_presets_are_resonant():
    for curve in figure_curves('6b'):
        wp = curve.wavepacket()
        assert wp.epsilon == NARROW_EPSILON
        assert wp.delta0 == pytest.approx(-(G0 ** 2 + 2 * G0 * curve.system.eta))
    assert figure_curves('2a')[0].wavepacket() is None


def test_state_presets():
    assert [figure_curves(f'5{c}')[0].state['kind'] for c in 'def'] == ['number', 'coherent', 'thermal']


def test_build_emission_figure():
    (curve, spectrum), = build_figure('2a')
    assert curve.label == 'ground'
    assert spectrum.kind == 'emission'
    assert spectrum.values.max() > 0
