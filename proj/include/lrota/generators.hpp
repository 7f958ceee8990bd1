#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lrota/matrix.hpp"
#include "lrota/tensor.hpp"

namespace lrota {

enum class TensorKind { gaussian, odeco_exact, odeco_noisy, defective_rank };

TensorKind parse_kind(const std::string& name);
std::string kind_name(TensorKind kind);

struct GeneratorSpec {
  TensorKind kind = TensorKind::gaussian;
  std::vector<std::size_t> dims;
  std::size_t rank = 1;  // generated rank; defective_rank builds truth at rank - 1
  double sigma = 0.0;    // noise level, odeco_noisy only
  std::uint64_t seed = 0;
};

struct GeneratedTensor {
  DenseTensor tensor;
  bool has_truth = false;
  std::vector<Matrix> truth_factors;  // per mode, n_i x true rank
  std::vector<double> truth_lambda;   // positive, unordered
};

// Deterministic test-instance families, one independent substream per
// ingredient so that kinds sharing a seed share their common parts:
// odeco_noisy(sigma) equals odeco_exact plus sigma times the gaussian
// tensor of the same seed, entry for entry.
//   gaussian:       i.i.d. standard normal entries, no truth
//   odeco_exact:    assembled from random orthonormal factors with
//                   diagonal values log-uniform in [0.5, 5]
//   odeco_noisy:    odeco_exact + sigma * gaussian
//   defective_rank: odeco_exact of rank one below the requested rank,
//                   for exercising truncation against a known deficiency
GeneratedTensor generate_tensor(const GeneratorSpec& spec);

}  // namespace lrota
