#include "tfwm/tf_analysis.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>

#include "tfwm/errors.hpp"

namespace tfwm {

struct FrameTransformer::Impl {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  fftw_plan dct = nullptr;
  fftw_plan idct = nullptr;
  fftw_complex* cbuf_in = nullptr;
  fftw_complex* cbuf_out = nullptr;
  double* rbuf_in = nullptr;
  double* rbuf_out = nullptr;
};

FrameTransformer::FrameTransformer(int length) : length_(length) {
  if (length <= 0) fail(ErrorClass::config, "transform length must be positive");
  impl_ = new Impl;
  const std::size_t n = static_cast<std::size_t>(length);
  impl_->cbuf_in = fftw_alloc_complex(n);
  impl_->cbuf_out = fftw_alloc_complex(n);
  impl_->rbuf_in = fftw_alloc_real(n);
  impl_->rbuf_out = fftw_alloc_real(n);
  impl_->fwd = fftw_plan_dft_1d(length, impl_->cbuf_in, impl_->cbuf_out,
                                FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_dft_1d(length, impl_->cbuf_in, impl_->cbuf_out,
                                FFTW_BACKWARD, FFTW_ESTIMATE);
  impl_->dct = fftw_plan_r2r_1d(length, impl_->rbuf_in, impl_->rbuf_out,
                                FFTW_REDFT10, FFTW_ESTIMATE);
  impl_->idct = fftw_plan_r2r_1d(length, impl_->rbuf_in, impl_->rbuf_out,
                                 FFTW_REDFT01, FFTW_ESTIMATE);
}

FrameTransformer::~FrameTransformer() {
  fftw_destroy_plan(impl_->fwd);
  fftw_destroy_plan(impl_->bwd);
  fftw_destroy_plan(impl_->dct);
  fftw_destroy_plan(impl_->idct);
  fftw_free(impl_->cbuf_in);
  fftw_free(impl_->cbuf_out);
  fftw_free(impl_->rbuf_in);
  fftw_free(impl_->rbuf_out);
  delete impl_;
}

void FrameTransformer::fft(const cplx* in, cplx* out) const {
  // std::complex<double> and fftw_complex share the double[2] layout
  std::memcpy(impl_->cbuf_in, static_cast<const void*>(in),
              sizeof(cplx) * static_cast<std::size_t>(length_));
  fftw_execute(impl_->fwd);
  std::memcpy(static_cast<void*>(out), impl_->cbuf_out,
              sizeof(cplx) * static_cast<std::size_t>(length_));
}

void FrameTransformer::ifft(const cplx* in, cplx* out) const {
  std::memcpy(impl_->cbuf_in, static_cast<const void*>(in),
              sizeof(cplx) * static_cast<std::size_t>(length_));
  fftw_execute(impl_->bwd);
  std::memcpy(static_cast<void*>(out), impl_->cbuf_out,
              sizeof(cplx) * static_cast<std::size_t>(length_));
}

std::vector<double> FrameTransformer::dct_ortho(std::span<const double> in) const {
  const std::size_t n = static_cast<std::size_t>(length_);
  std::memcpy(impl_->rbuf_in, in.data(), sizeof(double) * n);
  fftw_execute(impl_->dct);
  // REDFT10 gives 2*sum x[n] cos(pi (2n+1) k / 2N); orthonormal DCT-II scales
  // bin 0 by sqrt(1/N)/2 and the rest by sqrt(2/N)/2.
  std::vector<double> out(n);
  const double s0 = std::sqrt(1.0 / length_) * 0.5;
  const double sk = std::sqrt(2.0 / length_) * 0.5;
  out[0] = impl_->rbuf_out[0] * s0;
  for (std::size_t k = 1; k < n; ++k) out[k] = impl_->rbuf_out[k] * sk;
  return out;
}

std::vector<double> FrameTransformer::idct_ortho(std::span<const double> in) const {
  const std::size_t n = static_cast<std::size_t>(length_);
  const double s0 = std::sqrt(1.0 / length_);
  const double sk = std::sqrt(1.0 / (2.0 * length_));
  impl_->rbuf_in[0] = in[0] * s0;
  for (std::size_t k = 1; k < n; ++k) impl_->rbuf_in[k] = in[k] * sk;
  fftw_execute(impl_->idct);
  return std::vector<double>(impl_->rbuf_out, impl_->rbuf_out + n);
}

namespace {

// Analytic signal via half-spectrum doubling. DC and Nyquist stay, positive
// bins double, negative bins vanish; the real part is then pinned to the
// input so Re(analytic(x)) == x holds exactly.
void analytic_with(const FrameTransformer& t, std::span<const double> frame,
                   std::vector<cplx>& scratch, std::vector<cplx>& out) {
  const int m0 = t.length();
  scratch.resize(static_cast<std::size_t>(m0));
  out.resize(static_cast<std::size_t>(m0));
  for (int n = 0; n < m0; ++n) out[static_cast<std::size_t>(n)] = frame[static_cast<std::size_t>(n)];
  t.fft(out.data(), scratch.data());
  const int half = m0 / 2;
  for (int k = 1; k < half; ++k) scratch[static_cast<std::size_t>(k)] *= 2.0;
  for (int k = half + 1; k < m0; ++k) scratch[static_cast<std::size_t>(k)] = 0.0;
  t.ifft(scratch.data(), out.data());
  const double inv = 1.0 / m0;
  for (int n = 0; n < m0; ++n)
    out[static_cast<std::size_t>(n)] =
        cplx(frame[static_cast<std::size_t>(n)], out[static_cast<std::size_t>(n)].imag() * inv);
}

struct Band {
  int lo;
  int hi;
};

Band band_bins(double f1_hz, double f2_hz, int m0, int sample_rate_hz) {
  if (sample_rate_hz <= 0) fail(ErrorClass::config, "sample rate must be positive");
  if (f1_hz < 0.0 || f1_hz >= f2_hz || f2_hz > sample_rate_hz / 2.0)
    fail(ErrorClass::config, "band must satisfy 0 <= f1 < f2 <= rate/2");
  const int lo = static_cast<int>(std::ceil(f1_hz * m0 / sample_rate_hz));
  const int hi = static_cast<int>(std::floor(f2_hz * m0 / sample_rate_hz));
  if (lo > hi)
    fail(ErrorClass::band, "empty band: no frequency bin lies inside [" +
                               std::to_string(f1_hz) + ", " + std::to_string(f2_hz) + "] Hz");
  return {lo, hi};
}

}  // namespace

std::vector<cplx> analytic_frame(std::span<const double> frame) {
  const int m0 = static_cast<int>(frame.size());
  if (m0 <= 0 || (m0 & 1))
    fail(ErrorClass::config, "analytic signal requires an even frame length");
  FrameTransformer t(m0);
  std::vector<cplx> scratch, out;
  analytic_with(t, frame, scratch, out);
  return out;
}

ComplexMatrix TfImage::band_copy() const {
  const int m = band_rows();
  ComplexMatrix out(static_cast<std::size_t>(m), cols());
  for (std::size_t c = 0; c < cols(); ++c)
    for (int r = 0; r < m; ++r) out.at(static_cast<std::size_t>(r), c) = band_at(r, c);
  return out;
}

TfImage forward(const FrameSet& frames, TransformKind kind, double f1_hz,
                double f2_hz, int sample_rate_hz) {
  const int m0 = frames.frame_length;
  if (m0 <= 0 || frames.frame_count() == 0)
    fail(ErrorClass::config, "cannot transform an empty frame set");
  if (kind == TransformKind::stft && (m0 & 1))
    fail(ErrorClass::config, "STFT requires an even frame length");

  const Band band = band_bins(f1_hz, f2_hz, m0, sample_rate_hz);
  const std::size_t count = frames.frame_count();

  TfImage image;
  image.full = ComplexMatrix(static_cast<std::size_t>(m0), count);
  image.bin_lo = band.lo;
  image.bin_hi = band.hi;
  image.frame_length = m0;
  image.original_length =
      count * static_cast<std::size_t>(m0) - static_cast<std::size_t>(frames.tail_padding);

  FrameTransformer t(m0);
  const double unitary = 1.0 / std::sqrt(static_cast<double>(m0));
  std::vector<cplx> buf(static_cast<std::size_t>(m0)), spec(static_cast<std::size_t>(m0));

  for (std::size_t c = 0; c < count; ++c) {
    const auto& fr = frames.frames[c];
    cplx* col = &image.full.at(0, c);
    if (kind == TransformKind::stft) {
      // fft(analytic(x)) is the half-spectrum doubling of fft(x); fusing the
      // two keeps the negative-frequency rows exactly zero
      for (int n = 0; n < m0; ++n) buf[static_cast<std::size_t>(n)] = fr[static_cast<std::size_t>(n)];
      t.fft(buf.data(), spec.data());
      const int half = m0 / 2;
      col[0] = spec[0] * unitary;
      for (int k = 1; k < half; ++k)
        col[k] = spec[static_cast<std::size_t>(k)] * (2.0 * unitary);
      col[half] = spec[static_cast<std::size_t>(half)] * unitary;
      for (int k = half + 1; k < m0; ++k) col[k] = cplx(0.0, 0.0);
    } else {
      const std::vector<double> coeff = t.dct_ortho(fr);
      for (int k = 0; k < m0; ++k) col[k] = cplx(coeff[static_cast<std::size_t>(k)], 0.0);
    }
  }
  return image;
}

std::vector<double> inverse(const TfImage& image, TransformKind kind) {
  const int m0 = image.frame_length;
  const std::size_t count = image.cols();
  if (m0 <= 0 || count == 0 || image.full.rows != static_cast<std::size_t>(m0))
    fail(ErrorClass::shape, "inconsistent image shape");
  if (image.bin_lo < 0 || image.bin_hi < image.bin_lo || image.bin_hi >= m0)
    fail(ErrorClass::shape, "inconsistent band bounds");

  FrameTransformer t(m0);
  const double root = std::sqrt(static_cast<double>(m0));
  std::vector<double> out;
  out.reserve(count * static_cast<std::size_t>(m0));
  std::vector<cplx> buf(static_cast<std::size_t>(m0));
  std::vector<double> rbuf(static_cast<std::size_t>(m0));

  for (std::size_t c = 0; c < count; ++c) {
    const cplx* col = &image.full.at(0, c);
    if (kind == TransformKind::stft) {
      t.ifft(col, buf.data());
      const double scale = 1.0 / root;  // unitary inverse = unnormalized ifft / sqrt(M0)
      for (int n = 0; n < m0; ++n)
        out.push_back(buf[static_cast<std::size_t>(n)].real() * scale);
    } else {
      for (int k = 0; k < m0; ++k) rbuf[static_cast<std::size_t>(k)] = col[k].real();
      const std::vector<double> x = t.idct_ortho(rbuf);
      out.insert(out.end(), x.begin(), x.end());
    }
  }
  if (image.original_length > out.size())
    fail(ErrorClass::shape, "original length exceeds framed length");
  out.resize(image.original_length);
  return out;
}

TfImage writeback(TfImage image, const ComplexMatrix& band_new) {
  const int m = image.band_rows();
  if (band_new.rows != static_cast<std::size_t>(m) || band_new.cols != image.cols())
    fail(ErrorClass::shape, "band replacement shape mismatch: expected " +
                                std::to_string(m) + "x" + std::to_string(image.cols()));
  for (std::size_t c = 0; c < image.cols(); ++c)
    for (int r = 0; r < m; ++r)
      image.band_at(r, c) = band_new.at(static_cast<std::size_t>(r), c);
  return image;
}

}  // namespace tfwm
