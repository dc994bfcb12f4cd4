#pragma once

#include <map>
#include <span>
#include <utility>

#include "bnlab/field.hpp"

namespace bnlab::lp {

/// Radial dyadic bump phi with support in the annulus 5/6 <= |xi| <= 12/5.
///
/// phi(r) = chi(r/2) - chi(r) where chi is a smooth nonincreasing cutoff equal
/// to 1 on [0, 5/6] and 0 on [6/5, inf), built from the exp(-1/x) mollifier.
/// Sums of dilates telescope, so sum_j phi(2^-j r) = 1 for r > 0.
class DyadicBump {
 public:
  static constexpr double kInner = 5.0 / 6.0;
  static constexpr double kOuter = 12.0 / 5.0;

  static double chi(double r) noexcept;
  static double phi(double r) noexcept;
  /// phi(2^-j |xi|)
  static double block_weight(int j, double xi) noexcept;
};

struct JRange {
  int j_min = 0;
  int j_max = 0;
};

/// Smallest range of blocks whose bumps sum to one on every nonzero mode of
/// the grid.
JRange dyadic_range(const GridSpec& grid);

struct DyadicBlocks {
  int j_min = 0;
  int j_max = 0;
  std::map<int, Field> blocks;
  double mean_mode = 0.0;
};

/// Throws GridTooCoarse if j_max - j_min < 3.
DyadicBlocks decompose(const Field& f);

/// Single block Delta_j f.
Field block(const Field& f, int j);

struct BesovReport {
  double s = 0.0;
  int j_min = 0;  // truncation of the j-sum on this grid
  int j_max = 0;
  std::map<int, double> block_l2;  // ||Delta_j f||_{L^2}
  std::map<int, double> per_j;     // 2^{js} ||Delta_j f||_{L^2}
  double total = 0.0;
  double low = 0.0;   // j <= 0
  double high = 0.0;  // j >= -1
};

BesovReport besov_norm(const Field& f, double s);
/// Sum of B^s norms of several fields; tuples are normed componentwise.
double besov_sum(std::span<const Field> fields, double s);

/// (f^l, f^h): f^l collects blocks j <= -1 plus the mean mode, f^h = f - f^l.
std::pair<Field, Field> low_high_split(const Field& f);

enum class TimeNorm { L1, L2, Linf };

/// sum_j 2^{js} || ||Delta_j f(t)||_{L^2} ||_{L^rho(0,T)} over samples spaced
/// by dt; rectangle rule on the M-1 intervals (left endpoints).
double chemin_lerner_norm(std::span<const Field> history, double s, TimeNorm rho, double dt);

/// Max over nonzero modes of |sum_j phi(2^-j xi) - 1| on the grid.
double partition_residual(const GridSpec& grid);

}  // namespace bnlab::lp
