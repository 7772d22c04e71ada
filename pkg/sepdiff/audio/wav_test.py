import os
import tempfile
import unittest

import numpy as np
import soundfile as sf

from sepdiff.audio import AudioBuffer, WavFormat, read_wav, write_wav, quantize_pcm16
from sepdiff.errors import AudioIOError, CorruptFileError, InvalidArgumentError, UnsupportedFormatError


class TestAudioBuffer(unittest.TestCase):
    def test_rejects_empty(self):
        with self.assertRaises(InvalidArgumentError):
            AudioBuffer(np.zeros((2, 0), dtype=np.float32), 44100)

    def test_rejects_non_finite(self):
        samples = np.zeros((1, 4), dtype=np.float32)
        samples[0, 2] = np.nan
        with self.assertRaises(InvalidArgumentError):
            AudioBuffer(samples, 44100)

    def test_stores_float32(self):
        buf = AudioBuffer(np.ones((2, 3)), 8000)
        self.assertEqual(buf.samples.dtype, np.float32)
        self.assertEqual(buf.channels, 2)
        self.assertEqual(buf.length, 3)


class TestWavRoundTrip(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.rng = np.random.default_rng(7)

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_float_round_trip(self):
        buf = AudioBuffer(self.rng.uniform(-1, 1, size=(2, 1000)), 44100)
        write_wav(self.path("a.wav"), buf, WavFormat.FLOAT32)
        back = read_wav(self.path("a.wav"))
        self.assertEqual(back.sample_rate, 44100)
        self.assertEqual(back.shape, (2, 1000))
        self.assertLessEqual(np.max(np.abs(back.samples - buf.samples)), 1e-7)

    def test_float_keeps_values_above_full_scale(self):
        buf = AudioBuffer(np.array([[1.5, -2.0, 0.25]]), 16000)
        write_wav(self.path("loud.wav"), buf, WavFormat.FLOAT32)
        np.testing.assert_array_equal(read_wav(self.path("loud.wav")).samples, buf.samples)

    def test_pcm16_round_trip_error_bound(self):
        buf = AudioBuffer(self.rng.uniform(-1, 1, size=(2, 1000)), 22050)
        write_wav(self.path("b.wav"), buf, WavFormat.PCM16)
        back = read_wav(self.path("b.wav"))
        self.assertLessEqual(np.max(np.abs(back.samples - buf.samples)), 2.0 ** -15)

    def test_pcm16_full_scale_negative(self):
        self.assertEqual(quantize_pcm16(np.array([-1.0]))[0], -32768)
        buf = AudioBuffer(np.array([[-1.0, 0.0]]), 8000)
        write_wav(self.path("neg.wav"), buf, WavFormat.PCM16)
        raw, _ = sf.read(self.path("neg.wav"), dtype="int16")
        self.assertEqual(int(raw[0]), -32768)

    def test_pcm16_clamps(self):
        buf = AudioBuffer(np.array([[1.5, -1.5]]), 8000)
        write_wav(self.path("clip.wav"), buf, WavFormat.PCM16)
        back = read_wav(self.path("clip.wav"))
        self.assertAlmostEqual(float(back.samples[0, 0]), 1.0 - 2.0 ** -15, places=9)
        self.assertAlmostEqual(float(back.samples[0, 1]), -1.0, places=9)

    def test_pcm24_is_read(self):
        data = self.rng.uniform(-0.9, 0.9, size=(500, 2))
        sf.write(self.path("c.wav"), data, 48000, subtype="PCM_24")
        back = read_wav(self.path("c.wav"))
        self.assertEqual(back.shape, (2, 500))
        self.assertLessEqual(np.max(np.abs(back.samples - data.T)), 2.0 ** -23 + 1e-7)

    def test_mono_is_duplicated_on_request(self):
        buf = AudioBuffer(self.rng.uniform(-1, 1, size=(1, 50)), 8000)
        write_wav(self.path("mono.wav"), buf)
        back = read_wav(self.path("mono.wav"), channels=2)
        self.assertEqual(back.shape, (2, 50))
        np.testing.assert_array_equal(back.samples[0], back.samples[1])

    def test_segment_read(self):
        buf = AudioBuffer(np.arange(100, dtype=np.float32).reshape(1, 100) / 100, 8000)
        write_wav(self.path("seg.wav"), buf)
        seg = read_wav(self.path("seg.wav"), start=10, frames=5)
        np.testing.assert_array_equal(seg.samples, buf.samples[:, 10:15])

    def test_unsupported_codec(self):
        sf.write(self.path("u8.wav"), np.zeros(100), 8000, subtype="PCM_U8")
        with self.assertRaises(UnsupportedFormatError):
            read_wav(self.path("u8.wav"))

    def test_unsupported_container(self):
        with open(self.path("junk.wav"), "wb") as f:
            f.write(b"definitely not audio" * 10)
        with self.assertRaises(UnsupportedFormatError):
            read_wav(self.path("junk.wav"))

    def test_truncated_file(self):
        buf = AudioBuffer(self.rng.uniform(-1, 1, size=(2, 4000)), 44100)
        write_wav(self.path("t.wav"), buf)
        size = os.path.getsize(self.path("t.wav"))
        with open(self.path("t.wav"), "r+b") as f:
            f.truncate(size // 2)
        with self.assertRaises(CorruptFileError):
            read_wav(self.path("t.wav"))

    def test_missing_file(self):
        with self.assertRaises(AudioIOError):
            read_wav(self.path("nope.wav"))

    def test_write_failure_is_io_error(self):
        buf = AudioBuffer(np.zeros((1, 4)), 8000)
        blocker = self.path("file")
        with open(blocker, "w") as f:
            f.write("x")
        with self.assertRaises(AudioIOError):
            write_wav(os.path.join(blocker, "out.wav"), buf)


if __name__ == "__main__":
    unittest.main()
