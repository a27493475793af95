#include "lyap/periodic.hpp"

#include <fmt/format.h>

#include "lyap/linalg.hpp"

namespace lyap {

namespace {

void check_z(const BorderedProblem& prob, std::size_t size) {
  if (size != prob.field.dimension() + 1) throw UsageError("bordered problem: z must have dimension 1 + n");
  if (prob.section.dimension() != prob.field.dimension())
    throw UsageError("bordered problem: section dimension mismatch");
}

}  // namespace

IntervalVector K_eval(const BorderedProblem& prob, const IntervalVector& z) {
  check_z(prob, z.size());
  const std::size_t n = prob.field.dimension();
  if (!z[0].certainly_positive()) throw UsageError("K_eval: period must be positive");
  IntervalVector w = z.segment(1, n);
  FlowEnclosure fe = integrate_range(prob.field, w, z[0], prob.integrator, IntegrationMode::C0);
  IntervalVector k(n + 1);
  k[0] = prob.section.distance(w);
  for (std::size_t i = 0; i < n; ++i) k[i + 1] = fe.state[i] - w[i];
  return k;
}

IntervalMatrix DK_eval(const BorderedProblem& prob, const IntervalVector& z) {
  check_z(prob, z.size());
  const std::size_t n = prob.field.dimension();
  if (!z[0].certainly_positive()) throw UsageError("DK_eval: period must be positive");
  IntervalVector w = z.segment(1, n);
  FlowEnclosure fe = integrate_range(prob.field, w, z[0], prob.integrator, IntegrationMode::C1);
  IntervalVector f = prob.field(fe.state);
  IntervalMatrix d(n + 1, n + 1, Interval(0.0));
  for (std::size_t j = 0; j < n; ++j) d(0, j + 1) = Interval(prob.section.normal()(static_cast<Eigen::Index>(j)));
  for (std::size_t i = 0; i < n; ++i) {
    d(i + 1, 0) = f[i];
    for (std::size_t j = 0; j < n; ++j)
      d(i + 1, j + 1) = (*fe.variational)(i, j) - Interval(i == j ? 1.0 : 0.0);
  }
  return d;
}

Vec K_reference(const BorderedProblem& prob, const Vec& z, const ReferenceOptions& opts) {
  check_z(prob, static_cast<std::size_t>(z.size()));
  const Eigen::Index n = static_cast<Eigen::Index>(prob.field.dimension());
  Vec w = z.tail(n);
  Vec k(n + 1);
  k(0) = prob.section.distance(w);
  k.tail(n) = reference_flow(prob.field, w, z(0), opts) - w;
  return k;
}

Mat DK_reference(const BorderedProblem& prob, const Vec& z, const ReferenceOptions& opts) {
  check_z(prob, static_cast<std::size_t>(z.size()));
  const Eigen::Index n = static_cast<Eigen::Index>(prob.field.dimension());
  Vec x;
  Mat v;
  reference_flow_c1(prob.field, z.tail(n), z(0), x, v, opts);
  Mat d = Mat::Zero(n + 1, n + 1);
  d.block(0, 1, 1, n) = prob.section.normal().transpose();
  d.block(1, 0, n, 1) = prob.field(x);
  d.block(1, 1, n, n) = v - Mat::Identity(n, n);
  return d;
}

Vec refine_periodic_seed(const BorderedProblem& prob, const Vec& seed, int max_steps, const ReferenceOptions& opts) {
  Vec z = seed;
  double last = K_reference(prob, z, opts).lpNorm<Eigen::Infinity>();
  for (int i = 0; i < max_steps; ++i) {
    Vec k = K_reference(prob, z, opts);
    Vec dz = DK_reference(prob, z, opts).partialPivLu().solve(k);
    if (!dz.allFinite()) break;
    Vec next = z - dz;
    double r = K_reference(prob, next, opts).lpNorm<Eigen::Infinity>();
    if (!(r < last) && i > 0) break;
    z = next;
    last = r;
    if (dz.lpNorm<Eigen::Infinity>() <= 1e-15 * std::max(1.0, z.lpNorm<Eigen::Infinity>())) break;
  }
  return z;
}

PeriodicOrbitCertificate verify_periodic(const BorderedProblem& prob, const Vec& seed, const PeriodicOptions& opts) {
  check_z(prob, static_cast<std::size_t>(seed.size()));
  const std::size_t n = prob.field.dimension();
  PeriodicOrbitCertificate cert;
  cert.seed = opts.refine_seed ? refine_periodic_seed(prob, seed) : seed;
  Mat r;
  try {
    r = approx_inverse(DK_reference(prob, cert.seed)).inverse;
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("verify_periodic: singular DK at the seed: ") + e.what());
  }
  KrawczykResult kr;
  try {
    kr = krawczyk_verify([&](const IntervalVector& z) { return K_eval(prob, z); },
                         [&](const IntervalVector& z) { return DK_eval(prob, z); }, cert.seed, r, opts.krawczyk);
  } catch (const IntegrationError& e) {
    cert.message = std::string("integration failed: ") + e.what();
    return cert;
  }
  cert.verified = kr.verified;
  cert.iterations = kr.iterations;
  cert.message = kr.message;
  cert.period = kr.enclosure[0];
  cert.point = kr.enclosure.segment(1, n);
  return cert;
}

}  // namespace lyap
