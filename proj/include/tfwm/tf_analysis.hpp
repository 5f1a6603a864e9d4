#ifndef TFWM_TF_ANALYSIS_HPP
#define TFWM_TF_ANALYSIS_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "tfwm/audio_io.hpp"

namespace tfwm {

using cplx = std::complex<double>;

enum class TransformKind { stft, stct };

// Dense complex matrix, column major (frames are columns).
struct ComplexMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<cplx> data;

  ComplexMatrix() = default;
  ComplexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  cplx& at(std::size_t r, std::size_t c) { return data[c * rows + r]; }
  const cplx& at(std::size_t r, std::size_t c) const { return data[c * rows + r]; }
};

// Time-frequency image of a clip: one transformed frame per column, plus the
// band-limited view used for embedding (rows bin_lo..bin_hi of the full image).
struct TfImage {
  ComplexMatrix full;            // frame_length x frame count
  int bin_lo = 0;                // first retained frequency bin
  int bin_hi = 0;                // last retained bin, inclusive
  int frame_length = 0;          // M0
  std::size_t original_length = 0;  // N

  int band_rows() const { return bin_hi - bin_lo + 1; }
  std::size_t cols() const { return full.cols; }

  cplx& band_at(int r, std::size_t c) {
    return full.at(static_cast<std::size_t>(bin_lo + r), c);
  }
  const cplx& band_at(int r, std::size_t c) const {
    return full.at(static_cast<std::size_t>(bin_lo + r), c);
  }

  ComplexMatrix band_copy() const;
};

// Analytic signal of one frame: DC and Nyquist bins kept, positive bins
// doubled, negative bins zeroed. Frame length must be even. The real part of
// the result equals the input.
std::vector<cplx> analytic_frame(std::span<const double> frame);

// Per-frame orthonormal transform of the whole frame set. STFT applies the
// analytic-signal step before a unitary FFT; STCT is the orthonormal DCT-II
// with no analytic step. The retained band is bin_lo = ceil(f1*M0/rate),
// bin_hi = floor(f2*M0/rate).
TfImage forward(const FrameSet& frames, TransformKind kind, double f1_hz,
                double f2_hz, int sample_rate_hz);

// Per-frame inverse transform; for STFT the imaginary part of each
// reconstructed frame is discarded. Output truncated to original_length.
std::vector<double> inverse(const TfImage& image, TransformKind kind);

// Replaces rows bin_lo..bin_hi with band_new; all other rows bit-identical.
TfImage writeback(TfImage image, const ComplexMatrix& band_new);

// Frame-level transform plans shared across this library (FFT wrapper).
// One instance per frame length; not thread safe.
class FrameTransformer {
public:
  explicit FrameTransformer(int length);
  ~FrameTransformer();
  FrameTransformer(const FrameTransformer&) = delete;
  FrameTransformer& operator=(const FrameTransformer&) = delete;

  int length() const { return length_; }

  void fft(const cplx* in, cplx* out) const;      // unnormalized DFT
  void ifft(const cplx* in, cplx* out) const;     // unnormalized inverse DFT
  std::vector<double> dct_ortho(std::span<const double> in) const;   // DCT-II
  std::vector<double> idct_ortho(std::span<const double> in) const;  // DCT-III

private:
  struct Impl;
  Impl* impl_;
  int length_;
};

}  // namespace tfwm

#endif
