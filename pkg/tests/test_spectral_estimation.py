# tests/test_spectral_estimation.py

import csv
import dataclasses
import os

import numpy as np
import pytest

from conftest import DATA_DIR, SLOW_RATE_HZ
from respirad.dsp.association import normalized_xcorr, peak_lag
from respirad.dsp.spectral_estimation import averaged_autocorrelation, rate_rmse, rate_spectrum
from respirad.errors import ConfigValueError, DegenerateSignalError, ProcessingError
from respirad.models import AssociationSet, AveragedAutocorrelation, PairResult, RespSignal

N = 2930
T = np.arange(N) / SLOW_RATE_HZ
LAGS = np.arange(-244, 245) / SLOW_RATE_HZ  # ±5 s
BPM_GRID = 60.0 * SLOW_RATE_HZ / (LAGS.size * 8)


def _signal(values, bin_index, radar_id=1):
    return RespSignal(radar_id=radar_id, bin_index=bin_index, range=bin_index * 0.1,
                      displacement=np.asarray(values, dtype=float), slow_rate=SLOW_RATE_HZ)


def _association(signal_pairs, target_id=1):
    pairs, store = [], {}
    for x, y in signal_pairs:
        corr = normalized_xcorr(x, y, 5.0)
        lag, value = peak_lag(corr)
        pairs.append(PairResult(m=x.bin_index, k=y.bin_index, range1=x.range, range2=y.range,
                                peak_lag=lag, peak_value=value, accepted=True))
        store[(x.bin_index, y.bin_index)] = corr
    assoc = AssociationSet(target_id=target_id, pairs=tuple(pairs), representative_ranges=(1.0, 1.2))
    return assoc, store


def _acorr(values, lags=LAGS):
    return AveragedAutocorrelation(target_id=1, lags=lags, values=np.asarray(values, dtype=float), n_pairs=1)


def _rates(name):
    with open(os.path.join(DATA_DIR, name), newline="", encoding="utf-8") as f:
        return [float(row["rate_bpm"]) for row in csv.DictReader(f)]


# --- averaged_autocorrelation ---

def test_zero_lag_is_exactly_one():
    rng = np.random.default_rng(8)
    base = np.sin(2 * np.pi * 0.35 * T)
    assoc, store = _association([
        (_signal(base + 0.3 * rng.standard_normal(N), 10), _signal(np.roll(base, 12), 12, 2)),
        (_signal(base + 0.3 * rng.standard_normal(N), 11), _signal(np.roll(base, 10), 12, 2)),
    ])
    acorr = averaged_autocorrelation(assoc, store)
    assert acorr.n_pairs == 2
    assert acorr.values[np.argmin(np.abs(acorr.lags))] == 1.0
    assert np.min(np.abs(acorr.lags)) == 0.0


def test_single_pair_is_recentred_copy():
    x = _signal(np.sin(2 * np.pi * 0.35 * T), 10)
    y = _signal(np.sin(2 * np.pi * 0.35 * (T - 0.2)), 12, 2)
    assoc, store = _association([(x, y)])
    corr = store[(10, 12)]
    shift = int(round(assoc.pairs[0].peak_lag * SLOW_RATE_HZ))
    assert shift == 10

    acorr = averaged_autocorrelation(assoc, store)
    # un solo par conserva todo el soporte, desplazado
    assert acorr.lags.size == corr.lags.size
    zero = int(np.argmin(np.abs(acorr.lags)))
    centre = int(np.argmin(np.abs(corr.lags))) + shift
    expected = corr.values[centre:centre + 5] / assoc.pairs[0].peak_value
    assert np.allclose(acorr.values[zero:zero + 5], expected)


@pytest.mark.parametrize("delay, shift", [(0.2, 10), (-0.2, -10)])
def test_recentred_lag_axis_is_increasing_and_centred(delay, shift):
    x = _signal(np.sin(2 * np.pi * 0.35 * T), 10)
    y = _signal(np.sin(2 * np.pi * 0.35 * (T - delay)), 12, 2)
    assoc, store = _association([(x, y)])
    assert int(round(assoc.pairs[0].peak_lag * SLOW_RATE_HZ)) == shift

    acorr = averaged_autocorrelation(assoc, store)
    half = (LAGS.size - 1) // 2
    assert np.all(np.diff(acorr.lags) > 0)
    assert np.allclose(np.diff(acorr.lags), 1.0 / SLOW_RATE_HZ)
    assert acorr.lags[0] == pytest.approx(-(half + shift) / SLOW_RATE_HZ)
    assert acorr.lags[-1] == pytest.approx((half - shift) / SLOW_RATE_HZ)
    zero = int(np.flatnonzero(acorr.lags == 0.0)[0])
    assert zero == half + shift
    assert acorr.values[zero] == 1.0


def test_negative_dominant_peak_normalizes_to_one():
    x = _signal(np.sin(2 * np.pi * 0.35 * T), 10)
    y = _signal(-np.sin(2 * np.pi * 0.35 * (T - 0.2)), 12, 2)
    assoc, store = _association([(x, y)])
    pair = assoc.pairs[0]
    assert pair.peak_value < -0.99
    assert pair.peak_lag == pytest.approx(0.2, abs=1.0 / SLOW_RATE_HZ)

    acorr = averaged_autocorrelation(assoc, store)
    zero = int(np.flatnonzero(acorr.lags == 0.0)[0])
    assert acorr.values[zero] == 1.0
    period = int(round(SLOW_RATE_HZ / 0.35))
    assert acorr.values[zero + period // 2] == pytest.approx(-1.0, abs=0.02)
    assert rate_spectrum(acorr).rate_bpm == pytest.approx(21.0, abs=BPM_GRID)


@pytest.mark.slow
def test_averaging_more_pairs_reduces_autocorrelation_error():
    rng = np.random.default_rng(21)
    base_x = np.sin(2 * np.pi * 0.35 * T)
    base_y = np.sin(2 * np.pi * 0.35 * (T - 12 / SLOW_RATE_HZ))
    trials = 100
    errors = np.zeros(5)
    for _ in range(trials):
        assoc, store = _association([
            (_signal(base_x + rng.standard_normal(N), 10 + i),
             _signal(base_y + rng.standard_normal(N), 20 + i, 2))
            for i in range(5)
        ])
        for n in range(1, 6):
            acorr = averaged_autocorrelation(dataclasses.replace(assoc, pairs=assoc.pairs[:n]), store)
            reference = np.cos(2 * np.pi * 0.35 * acorr.lags)
            errors[n - 1] += np.mean((acorr.values - reference) ** 2)
    errors /= trials
    # error cuadrático medio frente al coseno limpio: ~1/|C_j|
    assert np.all(errors[1:] < 1.05 * errors[:-1])
    assert errors[4] < 0.5 * errors[0]


def test_autocorrelation_of_tone_is_periodic():
    x = _signal(np.sin(2 * np.pi * 0.35 * T), 10)
    y = _signal(np.sin(2 * np.pi * 0.35 * T + 0.1), 12, 2)
    assoc, store = _association([(x, y)])
    acorr = averaged_autocorrelation(assoc, store)
    period = int(round(SLOW_RATE_HZ / 0.35))
    zero = int(np.argmin(np.abs(acorr.lags)))
    assert acorr.values[zero + period] == pytest.approx(1.0, abs=0.02)
    assert acorr.values[zero + period // 2] == pytest.approx(-1.0, abs=0.02)


def test_missing_correlation_is_processing_error():
    x = _signal(np.sin(2 * np.pi * 0.35 * T), 10)
    y = _signal(np.sin(2 * np.pi * 0.35 * T), 12, 2)
    assoc, _ = _association([(x, y)])
    with pytest.raises(ProcessingError):
        averaged_autocorrelation(assoc, {})


# --- rate_spectrum ---

def test_tone_at_035_hz_gives_21_bpm():
    spectrum = rate_spectrum(_acorr(np.cos(2 * np.pi * 0.35 * LAGS)))
    assert spectrum.rate_bpm == pytest.approx(21.0, abs=BPM_GRID)


def test_tone_at_040_hz_gives_24_bpm():
    spectrum = rate_spectrum(_acorr(np.cos(2 * np.pi * 0.40 * LAGS)))
    assert spectrum.rate_bpm == pytest.approx(24.0, abs=BPM_GRID)


def test_spectrum_grid_matches_zero_padding():
    spectrum = rate_spectrum(_acorr(np.cos(2 * np.pi * 0.35 * LAGS)))
    step = np.diff(spectrum.frequencies)
    assert np.allclose(step, SLOW_RATE_HZ / (LAGS.size * 8))
    assert BPM_GRID == pytest.approx(0.75, abs=0.01)


def test_white_noise_spectrum_is_normalized_within_band():
    rng = np.random.default_rng(21)
    spectrum = rate_spectrum(_acorr(rng.standard_normal(LAGS.size)), band=(0.1, 0.7))
    assert spectrum.power.max() == 1.0
    assert np.all(spectrum.power >= 0)
    assert spectrum.frequencies.min() >= 0.1 and spectrum.frequencies.max() <= 0.7
    assert spectrum.band == (0.1, 0.7)


def test_too_few_lags_rejected():
    with pytest.raises(ProcessingError):
        rate_spectrum(_acorr([1.0], lags=np.array([0.0])))


def test_inverted_band_rejected():
    with pytest.raises(ConfigValueError):
        rate_spectrum(_acorr(np.cos(2 * np.pi * 0.35 * LAGS)), band=(0.7, 0.1))


def test_band_without_bins_rejected():
    with pytest.raises(ProcessingError):
        rate_spectrum(_acorr([1.0, 0.5], lags=np.array([0.0, 1.0 / SLOW_RATE_HZ])), band=(0.1, 0.2), zero_pad_factor=1)


def test_zero_autocorrelation_is_degenerate():
    with pytest.raises(DegenerateSignalError):
        rate_spectrum(_acorr(np.zeros(LAGS.size)))


# --- rate_rmse ---

def test_rmse_identical_is_zero():
    assert rate_rmse([12.0], [12.0]) == 0.0


def test_rmse_simple_cases():
    assert rate_rmse([12.0, 14.0], [13.0, 13.0]) == pytest.approx(1.0)
    assert rate_rmse([20.0, 24.0], [21.0, 24.0]) == pytest.approx(0.7071, abs=1e-4)


def test_rmse_reference_table():
    rmse = rate_rmse(_rates("tabla_estimaciones.csv"), _rates("tabla_referencias.csv"))
    assert rmse == pytest.approx(0.6305, abs=1e-3)
    assert rmse < 0.7


def test_rmse_length_mismatch():
    with pytest.raises(ProcessingError):
        rate_rmse([1.0, 2.0], [1.0])


def test_rmse_empty():
    with pytest.raises(ProcessingError):
        rate_rmse([], [])
