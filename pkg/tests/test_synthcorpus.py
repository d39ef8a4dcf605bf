import numpy as np
import pytest

from svdlid.audio import read_wav
from svdlid.errors import CorpusError
from svdlid.synthcorpus import (CorpusSpec, SyntheticCorpus, cyclic_transition, default_spec,
                                generate, generate_session, make_dynamics_pair, make_languages,
                                min_separation, speaker_params, stationary_distribution,
                                write_tone)


@pytest.fixture(scope="module")
def langs():
    return make_languages(3, n_states=8, dim=5, separation=2.0, seed=2)


def test_same_seed_same_frames(langs):
    spec = CorpusSpec(tuple(langs), 2, 2, 5.0, seed=7)
    a, b = generate(spec), generate(spec)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.features.frames, y.features.frames)
    other = generate(CorpusSpec(tuple(langs), 2, 2, 5.0, seed=8))
    assert not np.array_equal(a[0].features.frames, other[0].features.frames)


def test_one_minute_is_6000_frames(langs):
    spec = CorpusSpec(tuple(langs), 1, 1, 60.0)
    fm = generate_session(spec, 0, 0, 0)
    assert fm.frames.shape == (6000, 5)
    assert fm.frame_shift_ms == 10.0


def test_corpus_layout_and_reiteration(langs):
    spec = CorpusSpec(tuple(langs), 3, 2, 2.0)
    corpus = SyntheticCorpus(spec)
    keys = [(s.language, s.speaker, s.session) for s in corpus]
    assert len(keys) == len(corpus) == 18
    assert keys == [(s.language, s.speaker, s.session) for s in corpus]
    held = spec.held_out(2, 1, 1.0)
    assert [s.speaker for s in SyntheticCorpus(held)][:2] == [1000, 1001]


def test_separation_holds():
    langs = make_languages(4, separation=6.0, seed=0)
    assert min_separation(langs) >= 6.0
    assert all(np.sqrt(l.emission.variances).max() <= 1.0 for l in langs)
    with pytest.raises(CorpusError):
        make_languages(3, n_states=4, dim=2, separation=50.0)


def test_default_spec_matches_reference_scale():
    spec = default_spec()
    assert len(spec.languages) == 10
    assert (spec.speakers_per_language, spec.sessions_per_speaker) == (8, 4)
    assert spec.frames_per_session == 18000
    assert spec.languages[0].emission.dim == 39


def _batch_means_se(x, n_batches=50):
    b = x[: x.shape[0] // n_batches * n_batches].reshape(n_batches, -1, x.shape[1]).mean(axis=1)
    return b.std(axis=0, ddof=1) / np.sqrt(n_batches)


def test_session_moments_match_analytic_mixture(langs):
    spec = CorpusSpec(tuple(langs), 1, 1, 600.0, seed=3)
    x = generate_session(spec, 1, 0, 0).frames
    offset, means = speaker_params(spec, 1, 0)
    mean, cov = langs[1].moments(means, offset)
    # Frames are autocorrelated, so use batch means for the standard error.
    se = _batch_means_se(x)
    assert np.all(np.abs(x.mean(axis=0) - mean) <= 3.5 * se + 1e-12)
    np.testing.assert_allclose(np.cov(x.T), cov, atol=0.15 * np.abs(cov).max())


def test_state_occupancy_is_stationary():
    p = cyclic_transition(5, 0.6)
    np.testing.assert_allclose(stationary_distribution(p), 0.2)


def test_time_reversal_preserves_occupancy_and_reverses_dynamics():
    fwd, bwd = make_dynamics_pair(n_states=6, dim=3, seed=1)
    assert fwd.emission is bwd.emission
    np.testing.assert_allclose(fwd.stationary, bwd.stationary, atol=1e-12)
    pi = fwd.stationary
    flow = fwd.transition * pi[:, None]
    np.testing.assert_allclose(bwd.transition * pi[:, None], flow.T, atol=1e-12)
    assert not np.allclose(fwd.transition, bwd.transition)
    m1, c1 = fwd.moments()
    m2, c2 = bwd.moments()
    np.testing.assert_allclose(m1, m2)
    np.testing.assert_allclose(c1, c2)


def test_tone_wav(tmp_path):
    clip = write_tone(440.0, 0.5, 16000, 1.0, tmp_path / "tone.wav")
    back = read_wav(tmp_path / "tone.wav")
    assert back.sample_rate == 16000 and back.samples.size == 16000
    assert np.max(np.abs(back.samples - clip.samples)) <= 2.0 ** -15
    spec = np.abs(np.fft.rfft(back.samples))
    assert np.argmax(spec) == 440


def test_invalid_spec(langs):
    with pytest.raises(CorpusError):
        CorpusSpec(tuple(langs), 0, 1, 1.0)
    with pytest.raises(CorpusError):
        CorpusSpec(tuple(langs), 1, 1, 0.0)
