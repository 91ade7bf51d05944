#include "mhmgt/theorem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mhmgt/errors.hpp"
#include "mhmgt/rng.hpp"

namespace mhmgt {

const char* to_string(BaseFamily family) noexcept {
  return family == BaseFamily::Bernoulli ? "bernoulli" : "quadratic";
}

bool TheoremInstance::all_full_rank() const {
  return std::all_of(deficiency.begin(), deficiency.end(),
                     [](Index d) { return d == 0; });
}

void TheoremInstance::validate() const {
  if (block_sizes.empty()) throw std::invalid_argument("instance needs designs");
  require_dim(static_cast<Index>(deficiency.size()), groups(), "rank plan");
  if (family == BaseFamily::Bernoulli && groups() != 1) {
    throw std::invalid_argument("Bernoulli base has a single projection");
  }
  for (std::size_t j = 0; j < block_sizes.size(); ++j) {
    const Index k = block_sizes[j];
    if (k < 1) throw std::invalid_argument("block size must be >= 1");
    if (deficiency[j] < 0 || deficiency[j] >= k) {
      throw std::invalid_argument("rank deficit must be in [0, K_j)");
    }
    if (observations < k) {
      throw std::invalid_argument("N must be >= K_j for the rank plan");
    }
  }
}

std::size_t CampaignReport::passed() const {
  return static_cast<std::size_t>(std::count_if(
      outcomes.begin(), outcomes.end(), [](const InstanceOutcome& o) { return o.passed; }));
}

namespace {

Matrix random_design(Index n, Index k, Index deficit, Rng& rng) {
  Matrix x(n, k);
  for (Index c = 0; c < k; ++c) {
    for (Index r = 0; r < n; ++r) x(r, c) = standard_normal(rng);
  }
  // Trailing columns become combinations of the leading ones.
  const Index free = k - deficit;
  for (Index c = free; c < k; ++c) {
    Vector w(free);
    for (Index a = 0; a < free; ++a) w(a) = standard_normal(rng);
    x.col(c) = x.leftCols(free) * w;
  }
  return x;
}

}  // namespace

RealizedInstance realize(const TheoremInstance& inst) {
  inst.validate();
  Rng rng(inst.seed);
  const Index n = inst.observations;
  const Index jn = inst.groups();

  std::shared_ptr<const ProjectionBase> base;
  if (inst.family == BaseFamily::Bernoulli) {
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = uniform01(rng) < 0.5 ? 0.0 : 1.0;
    base = std::make_shared<const BernoulliBase>(std::move(y));
  } else {
    Matrix b(jn, jn);
    for (Index r = 0; r < jn; ++r) {
      for (Index c = 0; c < jn; ++c) b(r, c) = standard_normal(rng);
    }
    Matrix a = b * b.transpose();
    a.diagonal().array() += 0.5;
    Matrix centers(n, jn);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < jn; ++j) centers(i, j) = standard_normal(rng);
    }
    base = std::make_shared<const QuadraticBase>(SymMatrix(std::move(a)), std::move(centers));
  }

  std::vector<Matrix> designs;
  for (Index j = 0; j < jn; ++j) {
    designs.push_back(random_design(n, inst.block_sizes[j], inst.deficiency[j], rng));
  }
  LinearProjectionModel model(std::move(base), std::move(designs));
  Vector beta(model.dim());
  for (Index k = 0; k < beta.size(); ++k) beta(k) = 0.5 * standard_normal(rng);
  return {std::move(model), std::move(beta)};
}

Matrix finite_difference_hessian(const LinearProjectionModel& model,
                                 const Vector& beta, double step) {
  const Index d = model.dim();
  auto f = [&](const Vector& b) { return model.evaluate(b, Order::Value).value; };
  Matrix h(d, d);
  const double f0 = f(beta);
  for (Index a = 0; a < d; ++a) {
    Vector xp = beta, xm = beta;
    xp(a) += step;
    xm(a) -= step;
    h(a, a) = (f(xp) - 2.0 * f0 + f(xm)) / (step * step);
    for (Index b = 0; b < a; ++b) {
      Vector pp = beta, pm = beta, mp = beta, mm = beta;
      pp(a) += step; pp(b) += step;
      pm(a) += step; pm(b) -= step;
      mp(a) -= step; mp(b) += step;
      mm(a) -= step; mm(b) -= step;
      h(a, b) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step * step);
      h(b, a) = h(a, b);
    }
  }
  return h;
}

double projected_quadratic_form(const LinearProjectionModel& model,
                                const Vector& beta, const Vector& p) {
  require_dim(p.size(), model.dim(), "projected_quadratic_form direction");
  const Matrix u = model.project(beta);
  const Matrix q = model.project(p);  // row i is q_i
  BaseTerm term;
  double total = 0.0;
  for (Index i = 0; i < model.observations(); ++i) {
    model.base().evaluate(i, u.row(i).transpose(), Order::Hessian, term);
    const Vector qi = q.row(i).transpose();
    total += qi.dot(term.hessian * qi);
  }
  return total;
}

InstanceOutcome run_instance(const TheoremInstance& inst) {
  InstanceOutcome out;
  out.instance = inst;
  out.predicted = inst.all_full_rank() ? WitnessReport::Kind::Certificate
                                       : WitnessReport::Kind::Witness;
  std::ostringstream why;
  try {
    const RealizedInstance real = realize(inst);
    const auto& model = real.model;
    for (Index j = 0; j < model.groups(); ++j) {
      const Index want = inst.block_sizes[j] - inst.deficiency[j];
      if (model.rank(j) != want) {
        why << "design " << j << " realized rank " << model.rank(j)
            << " instead of " << want << "; ";
      }
    }

    const Matrix h = model.evaluate(real.beta, Order::Hessian).hessian->matrix();
    const Matrix h_fd = finite_difference_hessian(model, real.beta);
    const double h_norm = h.norm();
    out.assembly_rel_err = (h_fd - h).norm() / std::max(h_norm, 1e-300);
    if (!(out.assembly_rel_err < kAssemblyTolerance)) {
      why << "block assembly disagrees with finite differences ("
          << out.assembly_rel_err << "); ";
    }

    Rng rng(child_seed(inst.seed, 1));
    Vector p(model.dim());
    for (Index k = 0; k < p.size(); ++k) p(k) = standard_normal(rng);
    const double lhs = p.dot(h * p);
    const double rhs = projected_quadratic_form(model, real.beta, p);
    out.qi_identity_rel_err = std::abs(lhs - rhs) / std::max(h_norm * p.squaredNorm(), 1e-300);
    if (!(out.qi_identity_rel_err <= kIdentityTolerance)) {
      why << "q_i identity residual " << out.qi_identity_rel_err << "; ";
    }

    const WitnessReport w = negative_definiteness_witness(model, real.beta, 4, rng);
    out.observed = w.kind;
    if (w.kind == WitnessReport::Kind::Witness) {
      out.witness_rel = w.relative_quad_form;
      if (!(w.relative_quad_form <= kWitnessTolerance)) {
        why << "witness quadratic form too large (" << w.relative_quad_form << "); ";
      }
    }
    if (out.observed != out.predicted) {
      why << "predicted " << to_string(out.predicted) << " but observed "
          << to_string(out.observed) << "; ";
    }
  } catch (const std::exception& e) {
    why << "exception: " << e.what();
  }
  out.failure = why.str();
  out.passed = out.failure.empty();
  return out;
}

CampaignReport run_campaign(const std::vector<TheoremInstance>& instances) {
  CampaignReport report;
  report.outcomes.reserve(instances.size());
  for (const auto& inst : instances) report.outcomes.push_back(run_instance(inst));
  return report;
}

std::vector<TheoremInstance> random_instances(std::size_t count,
                                              std::uint64_t seed) {
  std::vector<TheoremInstance> out;
  out.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    Rng rng = make_rng(seed, idx);
    auto pick = [&](Index lo, Index hi) {
      return std::uniform_int_distribution<Index>(lo, hi)(rng);
    };
    TheoremInstance inst;
    inst.seed = child_seed(seed, idx + 0x10000);
    const bool bernoulli = uniform01(rng) < 0.5;
    inst.family = bernoulli ? BaseFamily::Bernoulli : BaseFamily::Quadratic;
    const Index jn = bernoulli ? 1 : 2;
    // Plans cycle through all-full, mixed and all-deficient designs.
    const Index plan = pick(0, jn == 1 ? 1 : 3);
    Index kmax = 0;
    for (Index j = 0; j < jn; ++j) {
      const Index k = pick(2, 5);
      inst.block_sizes.push_back(k);
      const bool deficient = jn == 1 ? plan == 1 : ((plan >> j) & 1) != 0;
      inst.deficiency.push_back(deficient ? pick(1, k - 1) : 0);
      kmax = std::max(kmax, k);
    }
    inst.observations = pick(kmax + 2, 40);
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace mhmgt
