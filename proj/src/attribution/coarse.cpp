#include "tokattr/attribution/coarse.hpp"

#include <cmath>

#include "tokattr/attribution/probe.hpp"
#include "tokattr/error.hpp"

namespace tokattr::attribution {

double CoarseDecomposition::total() const {
  double sum = p_initial + ln_delta;
  for (std::size_t l = 0; l < att_delta.size(); ++l) sum += att_delta[l] + ffn_delta[l];
  return sum;
}

CoarseDecomposition decompose_coarse(const model::CachedStates& cache, const model::ModelBundle& model,
                                     int position, int target) {
  if (position < 0 || position >= cache.length()) {
    throw IndexError("position " + std::to_string(position) + " out of range for sequence of length " +
                     std::to_string(cache.length()));
  }
  if (target < 0 || target >= model.config().vocab_size) {
    throw IndexError("target " + std::to_string(target) + " out of vocabulary range");
  }
  const Matrix& unembed = model.unembedding();
  const int n_layers = cache.n_layers();

  CoarseDecomposition out;
  out.att_delta.resize(static_cast<std::size_t>(n_layers));
  out.ffn_delta.resize(static_cast<std::size_t>(n_layers));

  out.p_initial = probe(cache.h0.row(position), unembed, target);
  double before = out.p_initial;
  for (int l = 0; l < n_layers; ++l) {
    const double mid = probe(cache.h_mid[l].row(position), unembed, target);
    const double after = probe(cache.h_out[l].row(position), unembed, target);
    out.att_delta[l] = mid - before;
    out.ffn_delta[l] = after - mid;
    before = after;
  }
  out.p_final = cache.final_probs(position, target);
  out.ln_delta = out.p_final - before;
  out.residual = std::abs(out.total() - out.p_final);
  return out;
}

}  // namespace tokattr::attribution
