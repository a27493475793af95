#include "lyapcli/equilibria.hpp"

#include <algorithm>
#include <mutex>

#include "lyap/linalg.hpp"
#include "lyap/parallel.hpp"

namespace lyapcli {

namespace {

bool excluded(const lyap::ExprSystem& f, const lyap::IntervalVector& box,
              const std::vector<lyap::KrawczykResult>& zeros, int depth) {
  double span = 0.0;
  for (std::size_t i = 0; i < box.size(); ++i) span = std::max(span, box[i].width());
  for (const auto& z : zeros) {
    if (z.enclosure.contains(box)) return true;
    if (!intersect(lyap::inflate(box, span), z.enclosure)) continue;
    // x - R f(x) contracts on hull(box, enclosure): at most one zero there,
    // and it is the verified one.
    try {
      lyap::IntervalVector h = hull(box, z.enclosure);
      lyap::Mat r = lyap::approx_inverse(f.jacobian(z.enclosure.mid())).inverse;
      lyap::IntervalMatrix c = lyap::IntervalMatrix::identity(box.size()) - mat_mul(r, f.jacobian(h));
      if (norm_inf(c) < 1.0) return true;
    } catch (const lyap::Error&) {
    }
  }
  try {
    lyap::IntervalVector fx = f(box);
    bool zero_possible = true;
    for (std::size_t i = 0; i < fx.size(); ++i)
      if (!fx[i].contains(0.0)) zero_possible = false;
    if (!zero_possible) return true;
    // Mean-value form around the midpoint.
    lyap::Vec c = box.mid();
    lyap::IntervalVector fc = f(lyap::IntervalVector::point(c));
    lyap::IntervalVector mv = fc + mat_vec(f.jacobian(box), box - c);
    for (std::size_t i = 0; i < mv.size(); ++i)
      if (!mv[i].contains(0.0)) return true;
  } catch (const lyap::DomainError&) {
  }
  if (depth == 0) return false;
  std::size_t axis = 0;
  for (std::size_t i = 1; i < box.size(); ++i)
    if (box[i].width() > box[axis].width()) axis = i;
  const double m = box[axis].mid();
  lyap::IntervalVector left = box, right = box;
  left[axis] = lyap::Interval(box[axis].lo(), m);
  right[axis] = lyap::Interval(m, box[axis].hi());
  return excluded(f, left, zeros, depth - 1) && excluded(f, right, zeros, depth - 1);
}

}  // namespace

EquilibriumSearch find_equilibria(const lyap::ExprSystem& f, const lyap::Grid& grid, const EquilibriumOptions& opts) {
  if (grid.dimension() != f.dimension()) throw lyap::UsageError("find_equilibria: grid dimension mismatch");
  EquilibriumSearch out;
  std::mutex mu;
  std::vector<lyap::Vec> limits;

  lyap::parallel_for(grid.size(), opts.threads, [&](std::size_t k) {
    lyap::Vec x = lyap::newton_refine(f, grid.cell(k).mid());
    if (!x.allFinite() || !grid.bounds().contains(lyap::IntervalVector::point(x))) return;
    if (f(x).lpNorm<Eigen::Infinity>() > 1e-8) return;
    std::lock_guard<std::mutex> lock(mu);
    limits.push_back(x);
  });
  // Deterministic order regardless of thread scheduling.
  std::sort(limits.begin(), limits.end(), [](const lyap::Vec& a, const lyap::Vec& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });

  for (const auto& x : limits) {
    bool known = false;
    for (const auto& z : out.zeros)
      if (z.enclosure.contains(lyap::IntervalVector::point(x))) known = true;
    if (known) continue;
    lyap::KrawczykResult r;
    try {
      r = lyap::verify_zero(f, x, opts.krawczyk);
    } catch (const lyap::Error&) {
      ++out.failed_verifications;
      continue;
    }
    if (!r.verified) {
      ++out.failed_verifications;
      continue;
    }
    bool dup = false;
    for (const auto& z : out.zeros)
      if (z.enclosure.contains(lyap::IntervalVector::point(r.enclosure.mid())) ||
          r.enclosure.contains(lyap::IntervalVector::point(z.enclosure.mid())))
        dup = true;
    if (!dup) out.zeros.push_back(std::move(r));
  }
  std::sort(out.zeros.begin(), out.zeros.end(), [](const auto& a, const auto& b) {
    lyap::Vec ma = a.enclosure.mid(), mb = b.enclosure.mid();
    return std::lexicographical_compare(ma.data(), ma.data() + ma.size(), mb.data(), mb.data() + mb.size());
  });

  std::vector<char> open(grid.size(), 0);
  lyap::parallel_for(grid.size(), opts.threads, [&](std::size_t k) {
    const lyap::IntervalVector cell = grid.cell(k);
    // Cells holding a verified zero: the part outside the enclosure still
    // has to be excluded, which the bisection handles.
    open[k] = excluded(f, cell, out.zeros, opts.exclusion_depth) ? 0 : 1;
  });
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (open[k]) out.unresolved.push_back(k);
  return out;
}

}  // namespace lyapcli
