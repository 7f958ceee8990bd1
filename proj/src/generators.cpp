#include "lrota/generators.hpp"

#include <algorithm>
#include <cmath>

#include "lrota/errors.hpp"
#include "lrota/matrix_kernels.hpp"
#include "lrota/rng.hpp"

namespace lrota {

namespace {

// Substream tags; fixed so regenerating any one ingredient is stable.
constexpr std::uint64_t kFactorStream = 1;
constexpr std::uint64_t kLambdaStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

void validate(const GeneratorSpec& spec) {
  if (spec.dims.empty()) throw ConfigError("generator: dims must be nonempty");
  for (std::size_t n : spec.dims) {
    if (n == 0) throw ConfigError("generator: zero dimension");
  }
  if (spec.sigma < 0.0) throw ConfigError("generator: sigma must be nonnegative");
  if (spec.sigma != 0.0 && spec.kind != TensorKind::odeco_noisy) {
    throw ConfigError("generator: sigma is only meaningful for odeco_noisy");
  }
  if (spec.kind == TensorKind::gaussian) return;
  std::size_t min_dim = *std::min_element(spec.dims.begin(), spec.dims.end());
  if (spec.rank < 1 || spec.rank > min_dim) {
    throw ConfigError("generator: rank must be in [1, min dims]");
  }
  if (spec.kind == TensorKind::defective_rank && spec.rank < 2) {
    throw ConfigError("generator: defective_rank needs rank >= 2");
  }
}

DenseTensor gaussian_fill(const std::vector<std::size_t>& dims, Rng rng) {
  DenseTensor a(dims);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.next_gaussian();
  return a;
}

}  // namespace

TensorKind parse_kind(const std::string& name) {
  if (name == "gaussian") return TensorKind::gaussian;
  if (name == "odeco_exact") return TensorKind::odeco_exact;
  if (name == "odeco_noisy") return TensorKind::odeco_noisy;
  if (name == "defective_rank") return TensorKind::defective_rank;
  throw ConfigError("unknown tensor kind: " + name);
}

std::string kind_name(TensorKind kind) {
  switch (kind) {
    case TensorKind::gaussian: return "gaussian";
    case TensorKind::odeco_exact: return "odeco_exact";
    case TensorKind::odeco_noisy: return "odeco_noisy";
    case TensorKind::defective_rank: return "defective_rank";
  }
  throw ConfigError("unknown tensor kind");
}

GeneratedTensor generate_tensor(const GeneratorSpec& spec) {
  validate(spec);
  Rng root(spec.seed);

  GeneratedTensor out;
  if (spec.kind == TensorKind::gaussian) {
    out.tensor = gaussian_fill(spec.dims, root.child(kNoiseStream));
    return out;
  }

  std::size_t true_rank =
      spec.kind == TensorKind::defective_rank ? spec.rank - 1 : spec.rank;
  Rng factor_rng = root.child(kFactorStream);
  for (std::size_t n : spec.dims) {
    out.truth_factors.push_back(random_orthonormal(n, true_rank, factor_rng).matrix());
  }
  Rng lambda_rng = root.child(kLambdaStream);
  double lo = std::log(0.5);
  double hi = std::log(5.0);
  out.truth_lambda.resize(true_rank);
  for (double& l : out.truth_lambda) l = std::exp(lambda_rng.uniform(lo, hi));

  out.tensor = assemble(out.truth_factors, out.truth_lambda);
  out.has_truth = true;

  if (spec.kind == TensorKind::odeco_noisy) {
    DenseTensor noise = gaussian_fill(spec.dims, root.child(kNoiseStream));
    for (std::size_t i = 0; i < out.tensor.size(); ++i) {
      out.tensor[i] += spec.sigma * noise[i];
    }
  }
  return out;
}

}  // namespace lrota
