// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "plclab/matrix.hpp"

namespace plclab {

/// LTI MIMO FIR channel: L tap matrices H[l], each rx x tx.
class MimoChannel {
 public:
  MimoChannel() = default;
  MimoChannel(std::size_t rx, std::size_t tx, std::size_t taps);
  explicit MimoChannel(std::vector<ComplexMatrix> taps);

  std::size_t rx() const noexcept { return rx_; }
  std::size_t tx() const noexcept { return tx_; }
  std::size_t taps() const noexcept { return taps_.size(); }

  const ComplexMatrix& tap(std::size_t l) const { return taps_.at(l); }
  cplx& at(std::size_t r, std::size_t t, std::size_t l) { return taps_.at(l)(r, t); }
  const cplx& at(std::size_t r, std::size_t t, std::size_t l) const { return taps_.at(l)(r, t); }

  /// Mean received power per sample per receive antenna for unit-power
  /// inputs on every transmit antenna: (1/rx) * sum |h|^2.
  double mean_gain() const;

  void validate() const;

 private:
  std::size_t rx_ = 0;
  std::size_t tx_ = 0;
  std::vector<ComplexMatrix> taps_;
};

/// Reads CSV `rx,tx,lag,re,im` (rx, tx 1-based; lag 0-based). Dimensions are
/// the largest indices seen; missing entries are zero. With `declared_taps`
/// set, any lag >= declared_taps is an error and the channel is padded to it.
MimoChannel load_channel(const std::filesystem::path& path,
                         std::optional<std::size_t> declared_taps = std::nullopt);

void save_channel(const std::filesystem::path& path, const MimoChannel& chan);

/// Random Rayleigh channel with an exponential power-delay profile; each
/// (rx, tx) pair has unit expected energy summed over its taps.
MimoChannel synth_channel(std::uint64_t seed, std::size_t rx, std::size_t tx, std::size_t taps,
                          double decay);

/// Prepends the last n_cp columns of a tx x N_p block.
ComplexMatrix add_cp(const ComplexMatrix& block, std::size_t n_cp);
ComplexMatrix remove_cp(const ComplexMatrix& block, std::size_t n_cp);

/// Received rx x N_p payload block for a CP-extended tx x (N_p + n_cp) input.
/// Noise is added only to the payload; nothing is transmitted before the block.
ComplexMatrix pass_through(const MimoChannel& chan, const ComplexMatrix& x_cp,
                           const ComplexMatrix& noise, std::size_t n_cp);

enum class ConvKind { linear_full, linear_truncated, circulant };

/// Block convolution matrix acting on stacked vectors ordered time-major,
/// phase-minor (element n * M + m is antenna m at time n).
struct BlockConvMatrix {
  ConvKind kind = ConvKind::circulant;
  ComplexMatrix matrix;
  std::size_t n_p = 0;
  std::size_t n_cp = 0;
  std::size_t rx = 0;
  std::size_t tx = 0;
};

/// linear_full: rows and columns cover all N_p + N_cp instants, block (u, v) = H[u - v].
/// linear_truncated: CP rows dropped, block (u, v) = H[u + N_cp - v].
/// circulant: N_p x N_p blocks, block (u, v) = sum of H[l] over l == u - v (mod N_p).
BlockConvMatrix build_conv_matrix(const MimoChannel& chan, ConvKind kind, std::size_t n_p,
                                  std::size_t n_cp);

/// Stacks an M x N block (rows = antennas) into the time-major vector.
std::vector<cplx> stack_block(const ComplexMatrix& block);
ComplexMatrix unstack_block(std::span<const cplx> v, std::size_t antennas);

/// Per-subcarrier rx x tx responses H_k = sum_l H[l] exp(-j 2 pi k l / N_p),
/// read off the first block column of a circulant matrix.
std::vector<ComplexMatrix> fft_diagonalize(const BlockConvMatrix& circ);

/// Unitary block DFT F (x) I_m of size (n * m) x (n * m).
ComplexMatrix block_dft_matrix(std::size_t n, std::size_t m);

/// Applies the unitary block DFT along the time index of every column.
ComplexMatrix apply_block_dft(const ComplexMatrix& a, std::size_t m);

bool is_block_circulant(const ComplexMatrix& a, std::size_t block_rows, std::size_t block_cols,
                        double rel_tol);

/// CSV `rx,tx,subcarrier,mag_db,phase_rad` with 1-based antenna indices.
void write_frequency_response(const std::filesystem::path& path,
                              std::span<const ComplexMatrix> response);

}  // namespace plclab
