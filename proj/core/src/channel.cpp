// SPDX-License-Identifier: Apache-2.0
#include "plclab/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

#include "plclab/io.hpp"
#include "plclab/numerics.hpp"
#include "plclab/random.hpp"

namespace plclab {

MimoChannel::MimoChannel(std::size_t rx, std::size_t tx, std::size_t taps)
    : rx_(rx), tx_(tx), taps_(taps, ComplexMatrix(rx, tx)) {
  validate();
}

MimoChannel::MimoChannel(std::vector<ComplexMatrix> taps) : taps_(std::move(taps)) {
  if (!taps_.empty()) {
    rx_ = taps_.front().rows();
    tx_ = taps_.front().cols();
  }
  validate();
}

double MimoChannel::mean_gain() const {
  double sum = 0.0;
  for (const auto& h : taps_) {
    for (const auto& v : h.data()) sum += std::norm(v);
  }
  return sum / static_cast<double>(rx_);
}

void MimoChannel::validate() const {
  if (taps_.empty()) throw std::invalid_argument("channel: L must be >= 1");
  if (rx_ == 0 || tx_ == 0) throw std::invalid_argument("channel: antenna counts must be >= 1");
  for (const auto& h : taps_) {
    if (h.rows() != rx_ || h.cols() != tx_) {
      throw std::invalid_argument("channel: tap matrices disagree in shape");
    }
    if (!all_finite(h)) throw std::invalid_argument("channel: non-finite tap");
  }
}

MimoChannel load_channel(const std::filesystem::path& path,
                         std::optional<std::size_t> declared_taps) {
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("channel file not found: " + path.string());
  }
  CsvReader reader(path, "rx,tx,lag,re,im");
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t, cplx, std::size_t>> rows;
  std::size_t rx = 0;
  std::size_t tx = 0;
  std::size_t taps = 0;
  std::vector<std::string_view> fields;
  while (reader.next(fields)) {
    if (fields.size() != 5) reader.fail("expected 5 fields");
    std::size_t r = 0;
    std::size_t t = 0;
    std::size_t l = 0;
    cplx v;
    try {
      r = parse_count(fields[0]);
      t = parse_count(fields[1]);
      l = parse_count(fields[2]);
      v = cplx(parse_number(fields[3]), parse_number(fields[4]));
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    if (r == 0 || t == 0) reader.fail("rx and tx indices are 1-based");
    if (declared_taps && l >= *declared_taps) {
      reader.fail("lag " + std::to_string(l) + " exceeds declared length L=" +
                  std::to_string(*declared_taps));
    }
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) reader.fail("non-finite tap");
    rx = std::max(rx, r);
    tx = std::max(tx, t);
    taps = std::max(taps, l + 1);
    rows.emplace_back(r - 1, t - 1, l, v, reader.line_number());
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": channel has no taps");
  if (declared_taps) taps = *declared_taps;

  MimoChannel chan(rx, tx, taps);
  std::vector<bool> seen(rx * tx * taps, false);
  for (const auto& [r, t, l, v, line] : rows) {
    const std::size_t key = (l * rx + r) * tx + t;
    if (seen[key]) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": duplicate tap");
    }
    seen[key] = true;
    chan.at(r, t, l) = v;
  }
  return chan;
}

void save_channel(const std::filesystem::path& path, const MimoChannel& chan) {
  std::string out = "rx,tx,lag,re,im\n";
  for (std::size_t r = 0; r < chan.rx(); ++r) {
    for (std::size_t t = 0; t < chan.tx(); ++t) {
      for (std::size_t l = 0; l < chan.taps(); ++l) {
        const cplx v = chan.at(r, t, l);
        out += std::to_string(r + 1) + "," + std::to_string(t + 1) + "," + std::to_string(l) +
               "," + format_number(v.real()) + "," + format_number(v.imag()) + "\n";
      }
    }
  }
  write_file(path, out);
}

MimoChannel synth_channel(std::uint64_t seed, std::size_t rx, std::size_t tx, std::size_t taps,
                          double decay) {
  if (!(decay > 0.0 && decay <= 1.0)) {
    throw std::invalid_argument("channel decay must be in (0, 1]");
  }
  MimoChannel chan(rx, tx, taps);
  double energy = 0.0;
  for (std::size_t l = 0; l < taps; ++l) energy += std::pow(decay, 2.0 * static_cast<double>(l));
  const double norm = 1.0 / std::sqrt(2.0 * energy);
  GaussianSource rng(seed);
  for (std::size_t l = 0; l < taps; ++l) {
    const double amp = norm * std::pow(decay, static_cast<double>(l));
    for (std::size_t r = 0; r < rx; ++r) {
      for (std::size_t t = 0; t < tx; ++t) {
        const double re = rng.normal();
        const double im = rng.normal();
        chan.at(r, t, l) = amp * cplx(re, im);
      }
    }
  }
  return chan;
}

ComplexMatrix add_cp(const ComplexMatrix& block, std::size_t n_cp) {
  const std::size_t n_p = block.cols();
  if (n_cp >= n_p && n_cp > 0) {
    throw std::invalid_argument("add_cp: N_cp (" + std::to_string(n_cp) +
                                ") must be smaller than N_p (" + std::to_string(n_p) + ")");
  }
  ComplexMatrix out(block.rows(), n_p + n_cp);
  for (std::size_t m = 0; m < block.rows(); ++m) {
    for (std::size_t i = 0; i < n_cp; ++i) out(m, i) = block(m, n_p - n_cp + i);
    for (std::size_t i = 0; i < n_p; ++i) out(m, n_cp + i) = block(m, i);
  }
  return out;
}

ComplexMatrix remove_cp(const ComplexMatrix& block, std::size_t n_cp) {
  if (n_cp >= block.cols() && n_cp > 0) {
    throw std::invalid_argument("remove_cp: block shorter than the cyclic prefix");
  }
  const std::size_t n_p = block.cols() - n_cp;
  ComplexMatrix out(block.rows(), n_p);
  for (std::size_t m = 0; m < block.rows(); ++m) {
    for (std::size_t i = 0; i < n_p; ++i) out(m, i) = block(m, n_cp + i);
  }
  return out;
}

ComplexMatrix pass_through(const MimoChannel& chan, const ComplexMatrix& x_cp,
                           const ComplexMatrix& noise, std::size_t n_cp) {
  if (n_cp + 1 < chan.taps()) throw std::invalid_argument("insufficient cyclic prefix");
  if (x_cp.rows() != chan.tx()) throw std::invalid_argument("pass_through: input rows != M_t");
  if (x_cp.cols() <= n_cp) throw std::invalid_argument("pass_through: empty payload");
  const std::size_t n_p = x_cp.cols() - n_cp;
  if (noise.rows() != chan.rx() || noise.cols() != n_p) {
    throw std::invalid_argument("pass_through: noise block must be M_r x N_p");
  }
  ComplexMatrix y = noise;
  for (std::size_t n = 0; n < n_p; ++n) {
    const std::size_t t_abs = n + n_cp;
    for (std::size_t l = 0; l < chan.taps() && l <= t_abs; ++l) {
      const auto& h = chan.tap(l);
      for (std::size_t r = 0; r < chan.rx(); ++r) {
        cplx acc = 0.0;
        for (std::size_t t = 0; t < chan.tx(); ++t) acc += h(r, t) * x_cp(t, t_abs - l);
        y(r, n) += acc;
      }
    }
  }
  return y;
}

BlockConvMatrix build_conv_matrix(const MimoChannel& chan, ConvKind kind, std::size_t n_p,
                                  std::size_t n_cp) {
  chan.validate();
  if (n_p == 0) throw std::invalid_argument("build_conv_matrix: N_p must be >= 1");
  const std::size_t mr = chan.rx();
  const std::size_t mt = chan.tx();
  const std::size_t span = n_p + n_cp;
  BlockConvMatrix out{kind, {}, n_p, n_cp, mr, mt};

  auto put = [&](ComplexMatrix& m, std::size_t u, std::size_t v, const ComplexMatrix& h) {
    for (std::size_t r = 0; r < mr; ++r) {
      for (std::size_t t = 0; t < mt; ++t) m(u * mr + r, v * mt + t) += h(r, t);
    }
  };

  switch (kind) {
    case ConvKind::linear_full:
      out.matrix = ComplexMatrix(mr * span, mt * span);
      for (std::size_t u = 0; u < span; ++u) {
        for (std::size_t l = 0; l < chan.taps() && l <= u; ++l) put(out.matrix, u, u - l, chan.tap(l));
      }
      break;
    case ConvKind::linear_truncated:
      out.matrix = ComplexMatrix(mr * n_p, mt * span);
      for (std::size_t u = 0; u < n_p; ++u) {
        const std::size_t t_abs = u + n_cp;
        for (std::size_t l = 0; l < chan.taps() && l <= t_abs; ++l) {
          put(out.matrix, u, t_abs - l, chan.tap(l));
        }
      }
      break;
    case ConvKind::circulant:
      out.matrix = ComplexMatrix(mr * n_p, mt * n_p);
      for (std::size_t u = 0; u < n_p; ++u) {
        for (std::size_t l = 0; l < chan.taps(); ++l) {
          put(out.matrix, u, (u + n_p - l % n_p) % n_p, chan.tap(l));
        }
      }
      break;
  }
  return out;
}

std::vector<cplx> stack_block(const ComplexMatrix& block) {
  std::vector<cplx> v(block.rows() * block.cols());
  for (std::size_t m = 0; m < block.rows(); ++m) {
    for (std::size_t n = 0; n < block.cols(); ++n) v[n * block.rows() + m] = block(m, n);
  }
  return v;
}

ComplexMatrix unstack_block(std::span<const cplx> v, std::size_t antennas) {
  if (antennas == 0 || v.size() % antennas != 0) {
    throw std::invalid_argument("unstack_block: length not a multiple of the antenna count");
  }
  ComplexMatrix out(antennas, v.size() / antennas);
  for (std::size_t i = 0; i < v.size(); ++i) out(i % antennas, i / antennas) = v[i];
  return out;
}

std::vector<ComplexMatrix> fft_diagonalize(const BlockConvMatrix& circ) {
  if (circ.kind != ConvKind::circulant) {
    throw std::invalid_argument("fft_diagonalize: matrix is not circulant");
  }
  const std::size_t n = circ.n_p;
  std::vector<ComplexMatrix> out(n, ComplexMatrix(circ.rx, circ.tx));
  std::vector<cplx> seq(n);
  const double scale = std::sqrt(static_cast<double>(n));
  for (std::size_t r = 0; r < circ.rx; ++r) {
    for (std::size_t t = 0; t < circ.tx; ++t) {
      for (std::size_t u = 0; u < n; ++u) seq[u] = circ.matrix(u * circ.rx + r, t);
      const auto spec = dft(seq);
      for (std::size_t k = 0; k < n; ++k) out[k](r, t) = spec[k] * scale;
    }
  }
  return out;
}

ComplexMatrix block_dft_matrix(std::size_t n, std::size_t m) {
  ComplexMatrix f(n * m, n * m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) /
                           static_cast<double>(n);
      const cplx w = scale * std::polar(1.0, angle);
      for (std::size_t i = 0; i < m; ++i) f(k * m + i, t * m + i) = w;
    }
  }
  return f;
}

ComplexMatrix apply_block_dft(const ComplexMatrix& a, std::size_t m) {
  if (m == 0 || a.rows() % m != 0) {
    throw std::invalid_argument("apply_block_dft: rows not a multiple of the block size");
  }
  const std::size_t n = a.rows() / m;
  ComplexMatrix out(a.rows(), a.cols());
  std::vector<cplx> seq(n);
  for (std::size_t c = 0; c < a.cols(); ++c) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t t = 0; t < n; ++t) seq[t] = a(t * m + i, c);
      const auto spec = dft(seq);
      for (std::size_t k = 0; k < n; ++k) out(k * m + i, c) = spec[k];
    }
  }
  return out;
}

bool is_block_circulant(const ComplexMatrix& a, std::size_t block_rows, std::size_t block_cols,
                        double rel_tol) {
  if (block_rows == 0 || block_cols == 0 || a.rows() % block_rows != 0 ||
      a.cols() % block_cols != 0 || a.rows() / block_rows != a.cols() / block_cols) {
    return false;
  }
  const std::size_t n = a.rows() / block_rows;
  const double bound = rel_tol * std::max(frobenius_norm(a), 1e-300);
  double err = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t d = (u + n - v) % n;
      for (std::size_t r = 0; r < block_rows; ++r) {
        for (std::size_t c = 0; c < block_cols; ++c) {
          err += std::norm(a(u * block_rows + r, v * block_cols + c) - a(d * block_rows + r, c));
        }
      }
    }
  }
  return std::sqrt(err) <= bound;
}

void write_frequency_response(const std::filesystem::path& path,
                              std::span<const ComplexMatrix> response) {
  std::string out = "rx,tx,subcarrier,mag_db,phase_rad\n";
  if (!response.empty()) {
    for (std::size_t r = 0; r < response.front().rows(); ++r) {
      for (std::size_t t = 0; t < response.front().cols(); ++t) {
        for (std::size_t k = 0; k < response.size(); ++k) {
          const cplx v = response[k](r, t);
          const double mag = std::abs(v);
          const double db = mag > 0.0 ? 20.0 * std::log10(mag) : -300.0;
          out += std::to_string(r + 1) + "," + std::to_string(t + 1) + "," + std::to_string(k) +
                 "," + format_number(db) + "," + format_number(std::arg(v)) + "\n";
        }
      }
    }
  }
  write_file(path, out);
}

}  // namespace plclab
