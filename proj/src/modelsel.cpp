#include "cgfa/modelsel.hpp"

#include "cgfa/errors.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

namespace cgfa {

std::vector<ModelId> grid_candidates(Family family, IntRange g_range, IntRange q_range) {
  if (g_range.lo > g_range.hi || q_range.lo > q_range.hi) {
    fail(ErrorKind::InvalidArgument, "grid_search: empty G or q range");
  }
  std::vector<ModelId> out;
  if (!is_factor(family)) {
    out.push_back(ModelId{family, 1, 0});
    return out;
  }
  const IntRange gs = is_mixture(family) ? g_range : IntRange{1, 1};
  for (int g = gs.lo; g <= gs.hi; ++g) {
    for (int q = q_range.lo; q <= q_range.hi; ++q) out.push_back(ModelId{family, g, q});
  }
  return out;
}

bool ranks_before(const ModelScore& a, const ModelScore& b) {
  if (a.fitted != b.fitted) return a.fitted;
  if (a.fitted && a.bic != b.bic) return a.bic > b.bic;
  if (a.m != b.m) return a.m < b.m;
  if (a.id.G != b.id.G) return a.id.G < b.id.G;
  return a.id.q < b.id.q;
}

Selection grid_search(const Matrix& X, const std::vector<ModelId>& candidates, const FitConfig& cfg,
                      unsigned threads) {
  if (candidates.empty()) fail(ErrorKind::InvalidArgument, "grid_search: no candidates");

  const std::size_t k = candidates.size();
  std::vector<ModelScore> scores(k);
  std::vector<std::optional<FitResult>> fits(k);

  auto run = [&](std::size_t i) {
    ModelScore& s = scores[i];
    s.id = candidates[i];
    s.n = static_cast<std::size_t>(X.rows());
    try {
      s.m = count_params(s.id, X.cols());
      FitResult r = fit_model(X, s.id, cfg);
      s.loglik = r.scoring.loglik;
      s.bic = r.scoring.bic;
      s.fitted = true;
      fits[i] = std::move(r);
    } catch (const Error& e) {
      s.failure = std::string(to_string(e.kind())) + ": " + e.what();
    } catch (const std::exception& e) {
      s.failure = e.what();
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, k));
  if (threads <= 1) {
    for (std::size_t i = 0; i < k; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < k; i = next++) run(i);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ranks_before(scores[a], scores[b]); });

  if (!scores[order.front()].fitted) {
    std::ostringstream msg;
    msg << "all " << k << " candidates failed; first: " << describe(scores[order.front()].id) << " ("
        << scores[order.front()].failure << ")";
    fail(ErrorKind::AllCandidatesFailed, msg.str());
  }

  Selection sel;
  for (std::size_t i : order) sel.ranked.push_back(scores[i]);
  sel.best = std::move(*fits[order.front()]);
  return sel;
}

Selection grid_search(const Matrix& X, Family family, IntRange g_range, IntRange q_range,
                      const FitConfig& cfg, unsigned threads) {
  return grid_search(X, grid_candidates(family, g_range, q_range), cfg, threads);
}

}  // namespace cgfa
