#include <doctest.h>

#include <cmath>

#include "support/corpus.hpp"
#include "tfwm/attack_sim.hpp"
#include "tfwm/errors.hpp"
#include "tfwm/quality.hpp"

using namespace tfwm;
namespace ts = tfwm::testsupport;

TEST_CASE("requantize snaps to the level grid") {
  AudioClip clip;
  clip.sample_rate_hz = 44100;
  clip.samples = {0.5, 0.5004, -0.251, 0.0};

  SUBCASE("8-bit grid") {
    const AudioClip out = requantize(clip, 8);
    CHECK(out.samples[0] == doctest::Approx(0.5));      // exact level
    CHECK(out.samples[1] == doctest::Approx(0.5));      // nearest level
    CHECK(std::fabs(out.samples[2] + 0.251) <= 1.0 / 256.0 + 1e-12);
    CHECK(out.samples[3] == 0.0);
  }
  SUBCASE("16-bit requantization of a 16-bit-grid clip is the identity") {
    const AudioClip host = ts::make_music_clip(3, 0.3);  // snapped to the grid
    const AudioClip out = requantize(host, 16);
    for (std::size_t i = 0; i < host.samples.size(); ++i)
      CHECK(std::fabs(out.samples[i] - host.samples[i]) <= std::pow(2.0, -15));
  }
  SUBCASE("depth bounds") {
    CHECK_THROWS_AS(requantize(clip, 3), Error);
    CHECK_THROWS_AS(requantize(clip, 17), Error);
  }
}

TEST_CASE("awgn hits the requested SNR and is reproducible") {
  const AudioClip clip = ts::make_music_clip(4, 1.5);

  SUBCASE("same seed, same noise") {
    const AudioClip a = awgn(clip, 30.0, 99);
    const AudioClip b = awgn(clip, 30.0, 99);
    CHECK(a.samples == b.samples);
    const AudioClip c = awgn(clip, 30.0, 100);
    CHECK(a.samples != c.samples);
  }
  SUBCASE("variance matches the 50 dB definition") {
    const AudioClip noisy = awgn(clip, 50.0, 7);
    double power = 0.0, noise = 0.0;
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
      power += clip.samples[i] * clip.samples[i];
      const double d = noisy.samples[i] - clip.samples[i];
      noise += d * d;
    }
    power /= static_cast<double>(clip.samples.size());
    noise /= static_cast<double>(clip.samples.size());
    CHECK(noise == doctest::Approx(power * 1e-5).epsilon(0.05));
  }
  SUBCASE("measured SNR within 0.2 dB of target") {
    for (double target : {30.0, 50.0}) {
      const AudioClip noisy = awgn(clip, target, 11);
      double noise = 0.0;
      for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        const double d = noisy.samples[i] - clip.samples[i];
        noise += d * d;
      }
      noise /= static_cast<double>(clip.samples.size());
      CHECK(std::fabs(snr_db(noisy, noise) - target) <= 0.2);
    }
  }
  SUBCASE("silent clip is a domain error") {
    AudioClip silent;
    silent.sample_rate_hz = 44100;
    silent.samples.assign(1000, 0.0);
    CHECK_THROWS_AS(awgn(silent, 30.0, 1), Error);
  }
}

TEST_CASE("amplitude_scale multiplies without clipping") {
  AudioClip clip;
  clip.sample_rate_hz = 44100;
  clip.samples = {0.9, -0.8, 0.1};

  const AudioClip same = amplitude_scale(clip, 1.0);
  CHECK(same.samples == clip.samples);

  const AudioClip loud = amplitude_scale(clip, 1.8);
  CHECK(loud.samples[0] == doctest::Approx(1.62));  // beyond full scale, kept
  CHECK_THROWS_AS(amplitude_scale(clip, 0.0), Error);
  CHECK_THROWS_AS(amplitude_scale(clip, -2.0), Error);
}

TEST_CASE("compress_proxy strength sweep") {
  const AudioClip clip = ts::make_music_clip(5, 1.0);

  SUBCASE("strength 1 is transparent") {
    const AudioClip out = compress_proxy(clip, 1.0);
    for (std::size_t i = 0; i < clip.samples.size(); ++i)
      CHECK(std::fabs(out.samples[i] - clip.samples[i]) < 1e-6);
  }
  SUBCASE("DWR never improves as strength falls") {
    double previous = std::numeric_limits<double>::infinity();
    for (double s : {1.0, 0.8, 0.6, 0.4, 0.2}) {
      const AudioClip out = compress_proxy(clip, s);
      const double d = dwr_db(clip, out);
      CHECK(d <= previous);
      previous = d;
    }
  }
  SUBCASE("strength bounds") {
    CHECK_THROWS_AS(compress_proxy(clip, 0.0), Error);
    CHECK_THROWS_AS(compress_proxy(clip, 1.1), Error);
  }
}

TEST_CASE("bitrate-to-strength mapping is fixed") {
  CHECK(proxy_strength_for_bitrate(128.0) == doctest::Approx(0.8));
  CHECK(proxy_strength_for_bitrate(64.0) == doctest::Approx(0.6));
  CHECK(proxy_strength_for_bitrate(192.0) == doctest::Approx(0.9));
  CHECK(proxy_strength_for_bitrate(32.0) == doctest::Approx(0.6));   // clamp low
  CHECK(proxy_strength_for_bitrate(320.0) == doctest::Approx(0.9));  // clamp high
}

TEST_CASE("alignment recovers injected codec delay") {
  const AudioClip clip = ts::make_music_clip(6, 0.5);

  SUBCASE("known shift is undone exactly") {
    const int delay = 137;
    AudioClip shifted;
    shifted.sample_rate_hz = clip.sample_rate_hz;
    shifted.samples.assign(static_cast<std::size_t>(delay), 0.0);
    shifted.samples.insert(shifted.samples.end(), clip.samples.begin(), clip.samples.end());

    const AudioClip aligned = align_to_reference(clip, shifted, 1024);
    REQUIRE(aligned.samples.size() == clip.samples.size());
    CHECK(aligned.samples == clip.samples);
  }
  SUBCASE("garbage does not align") {
    AudioClip noise = ts::make_electronic_clip(99, 0.5);
    for (std::size_t i = 0; i < noise.samples.size(); ++i)
      noise.samples[i] = (i % 2) ? 0.3 : -0.3;
    CHECK_THROWS_AS(align_to_reference(clip, noise, 256), Error);
  }
}

TEST_CASE("external codec round trip") {
  const AudioClip clip = ts::make_music_clip(8, 0.4);

  SUBCASE("transparent copy command is the identity up to 16-bit quantization") {
    const AudioClip out = external_codec(clip, "cp {in} {out}", 128.0);
    REQUIRE(out.samples.size() == clip.samples.size());
    for (std::size_t i = 0; i < clip.samples.size(); ++i)
      CHECK(std::fabs(out.samples[i] - clip.samples[i]) <= std::pow(2.0, -15));
  }
  SUBCASE("missing binary raises an external-tool error") {
    try {
      external_codec(clip, "/nonexistent_encoder_xyz {in} {out}", 128.0);
      FAIL("expected external-tool error");
    } catch (const Error& e) {
      CHECK(e.cls() == ErrorClass::external_tool);
    }
  }
  SUBCASE("placeholders are required") {
    CHECK_THROWS_AS(external_codec(clip, "cp a b", 128.0), Error);
  }
}
