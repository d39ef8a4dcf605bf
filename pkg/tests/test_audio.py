import struct

import numpy as np
import pytest

import oracles
from svdlid.audio import AudioClip, VadConfig, read_wav, remove_silence, write_wav
from svdlid.errors import (EmptyAfterVadError, UnsupportedEncodingError, WavFormatError,
                           WavNotFoundError)
from svdlid.synthcorpus import write_tone


def _riff(fmt_tag, channels, rate, bits, payload, extra=b""):
    block = channels * bits // 8
    fmt = struct.pack("<HHIIHH", fmt_tag, channels, rate, rate * block, block, bits) + extra
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", len(body)) + body


def test_silence_file_reads_as_zeros(tmp_path):
    write_wav(AudioClip(np.zeros(16000), 16000), tmp_path / "z.wav")
    clip = read_wav(tmp_path / "z.wav")
    assert clip.samples.size == 16000 and clip.sample_rate == 16000
    assert not clip.samples.any()


def test_tone_round_trip_within_16bit_quantisation(tmp_path):
    path = tmp_path / "tone.wav"
    write_tone(440.0, 0.5, 16000, 2.0, path)
    clip = read_wav(path)
    t = np.arange(32000) / 16000
    assert clip.samples.size == 32000
    assert np.max(np.abs(clip.samples - 0.5 * np.sin(2 * np.pi * 440 * t))) <= 2.0 ** -15


@pytest.mark.parametrize("bits,step", [(8, 2.0 ** -7), (16, 2.0 ** -15), (32, 1e-7)])
def test_round_trip_each_bit_depth(tmp_path, rng, bits, step):
    clip = AudioClip(rng.uniform(-0.9, 0.9, 4000), 8000)
    write_wav(clip, tmp_path / "x.wav", bits)
    back = read_wav(tmp_path / "x.wav")
    assert np.max(np.abs(back.samples - clip.samples)) <= step


def test_stereo_opposite_channels_average_to_zero(tmp_path, rng):
    left = np.round(rng.uniform(-0.5, 0.5, 1000) * 32767).astype("<i2")
    inter = np.stack([left, -left], axis=1).reshape(-1).tobytes()
    (tmp_path / "st.wav").write_bytes(_riff(1, 2, 16000, 16, inter))
    clip = read_wav(tmp_path / "st.wav")
    assert clip.samples.size == 1000 and not clip.samples.any()


def test_extensible_float_is_accepted(tmp_path):
    data = np.array([0.25, -0.5], dtype="<f4").tobytes()
    guid = struct.pack("<H", 3) + b"\x00\x00\x00\x00\x10\x00\x80\x00\x00\xaa\x00\x38\x9b\x71"
    extra = struct.pack("<HHI", 22, 32, 4) + guid
    (tmp_path / "ext.wav").write_bytes(_riff(0xFFFE, 1, 8000, 32, data, extra))
    np.testing.assert_array_equal(read_wav(tmp_path / "ext.wav").samples, [0.25, -0.5])


def test_read_errors_are_distinct(tmp_path):
    with pytest.raises(WavNotFoundError):
        read_wav(tmp_path / "missing.wav")
    (tmp_path / "junk.wav").write_bytes(b"not a wave file at all")
    with pytest.raises(WavFormatError):
        read_wav(tmp_path / "junk.wav")
    good = _riff(1, 1, 8000, 16, b"\x00\x01" * 100)
    (tmp_path / "trunc.wav").write_bytes(good[:30])
    with pytest.raises(WavFormatError):
        read_wav(tmp_path / "trunc.wav")
    (tmp_path / "adpcm.wav").write_bytes(_riff(2, 1, 8000, 4, b"\x00" * 64))
    with pytest.raises(UnsupportedEncodingError):
        read_wav(tmp_path / "adpcm.wav")
    assert not issubclass(UnsupportedEncodingError, WavFormatError)


def test_all_zero_clip_is_empty_after_vad():
    with pytest.raises(EmptyAfterVadError, match="empty after VAD"):
        remove_silence(AudioClip(np.zeros(8000), 16000))


def test_constant_tone_passes_unchanged():
    t = np.arange(32000) / 16000
    clip = AudioClip(np.sin(2 * np.pi * 500 * t), 16000)
    np.testing.assert_array_equal(remove_silence(clip).samples, clip.samples)


def test_tone_silence_tone_keeps_sixteen_seconds():
    rate = 16000
    t = np.arange(8 * rate) / rate
    tone = 0.5 * np.sin(2 * np.pi * 300 * t)
    x = np.concatenate([tone, np.zeros(2 * rate), tone])
    out = remove_silence(AudioClip(x, rate))
    hop, frame_len = 160, 400
    kept, n_frames = oracles.vad_surviving_frames(x, frame_len, hop, -40.0)
    assert abs(out.duration - 16.0) <= frame_len / rate
    # Each surviving frame contributes one hop; the last frame also owns the tail.
    tail = x.size - (n_frames - 1) * hop - hop
    assert out.samples.size == kept * hop + tail


def _bursts(rng, rate=8000):
    parts = []
    for _ in range(6):
        n = int(rng.integers(rate // 4, rate))
        amp = rng.uniform(0.05, 1.0)
        parts.append(amp * np.sin(2 * np.pi * 400 * np.arange(n) / rate))
        parts.append(np.zeros(int(rng.integers(rate // 10, rate // 2))))
    return AudioClip(np.concatenate(parts), rate)


def test_vad_is_idempotent(rng):
    for _ in range(5):
        once = remove_silence(_bursts(rng))
        twice = remove_silence(once)
        assert twice.samples.size == once.samples.size


def test_vad_output_is_blockwise_subsequence(rng):
    clip = _bursts(rng)
    out = remove_silence(clip, VadConfig())
    hop = 80
    x, y = clip.samples, out.samples
    # Walk the input in hop blocks and match the output greedily.
    pos = 0
    for s in range(0, x.size, hop):
        if pos < y.size and np.array_equal(x[s:s + hop], y[pos:pos + hop]) and pos + hop <= y.size:
            pos += hop
    assert pos >= y.size - 2 * hop


def test_vad_config_invariants():
    with pytest.raises(ValueError):
        VadConfig(frame_ms=10, shift_ms=20)
    with pytest.raises(ValueError):
        VadConfig(threshold_db=3.0)


def test_audio_clip_invariants():
    with pytest.raises(ValueError):
        AudioClip(np.array([]), 8000)
    with pytest.raises(ValueError):
        AudioClip(np.array([np.nan]), 8000)
    with pytest.raises(ValueError):
        AudioClip(np.zeros(4), 0)
