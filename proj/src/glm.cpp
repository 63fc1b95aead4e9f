#include "hetbandit/glm.hpp"

#include <algorithm>
#include <cmath>

namespace hetbandit {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) {
    // log(1 + e^z), overflow-safe
    if (z > 30.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

}  // namespace

double GlmModel::h(double z) const {
    const double z0 = A * B;
    switch (link) {
        case LinkKind::identity:
            return z;
        case LinkKind::scaled_linear:
            return slope * z;
        case LinkKind::logistic:
            if (z > z0) return sigmoid(z0) + h_prime(z0) * (z - z0);
            if (z < -z0) return sigmoid(-z0) + h_prime(-z0) * (z + z0);
            return sigmoid(z);
    }
    throw std::logic_error("GlmModel::h: unknown link");
}

double GlmModel::h_prime(double z) const {
    const double z0 = A * B;
    switch (link) {
        case LinkKind::identity:
            return 1.0;
        case LinkKind::scaled_linear:
            return slope;
        case LinkKind::logistic: {
            const double zc = std::clamp(z, -z0, z0);
            const double s = sigmoid(zc);
            return s * (1.0 - s);
        }
    }
    throw std::logic_error("GlmModel::h_prime: unknown link");
}

double GlmModel::m(double z) const {
    const double z0 = A * B;
    switch (link) {
        case LinkKind::identity:
            return 0.5 * z * z;
        case LinkKind::scaled_linear:
            return 0.5 * slope * z * z;
        case LinkKind::logistic: {
            if (z > z0) {
                const double dz = z - z0;
                return softplus(z0) + sigmoid(z0) * dz + 0.5 * h_prime(z0) * dz * dz;
            }
            if (z < -z0) {
                const double dz = z + z0;
                return softplus(-z0) + sigmoid(-z0) * dz + 0.5 * h_prime(-z0) * dz * dz;
            }
            return softplus(z);
        }
    }
    throw std::logic_error("GlmModel::m: unknown link");
}

void GlmModel::validate() const {
    if (d < 1) throw std::invalid_argument("GlmModel: d must be >= 1");
    if (!(A > 0.0) || !(B > 0.0)) {
        throw std::invalid_argument("GlmModel: A and B must be positive");
    }
    if (!(kappa > 0.0) || !(K >= kappa)) {
        throw std::invalid_argument("GlmModel: need 0 < kappa <= K");
    }
    const double z0 = A * B;
    const int grid = 10000;
    double prev = h(-z0);
    for (int i = 1; i < grid; ++i) {
        const double z = -z0 + 2.0 * z0 * static_cast<double>(i) / grid;
        const double hp = h_prime(z);
        if (hp < kappa * (1.0 - 1e-9) || hp > K * (1.0 + 1e-9)) {
            throw std::invalid_argument(
                "GlmModel: h' leaves [kappa, K] at z = " + std::to_string(z));
        }
        const double hz = h(z);
        if (hz < prev) {
            throw std::invalid_argument("GlmModel: h not monotone at z = " +
                                        std::to_string(z));
        }
        prev = hz;
    }
}

GlmModel GlmModel::identity_link(int d, double A, double B) {
    GlmModel m;
    m.link = LinkKind::identity;
    m.d = d;
    m.A = A;
    m.B = B;
    m.K = 1.0;
    m.kappa = 1.0;
    m.validate();
    return m;
}

GlmModel GlmModel::logistic_link(int d, double A, double B) {
    GlmModel m;
    m.link = LinkKind::logistic;
    m.d = d;
    m.A = A;
    m.B = B;
    m.K = 0.25;
    const double s = sigmoid(A * B);
    m.kappa = s * (1.0 - s);  // derivative floor, attained at the boundary
    m.validate();
    return m;
}

GlmModel GlmModel::scaled_link(int d, double A, double B, double slope) {
    if (!(slope > 0.0)) {
        throw std::invalid_argument("GlmModel: scaled link needs positive slope");
    }
    GlmModel m;
    m.link = LinkKind::scaled_linear;
    m.d = d;
    m.A = A;
    m.B = B;
    m.slope = slope;
    m.K = slope;
    m.kappa = slope;
    m.validate();
    return m;
}

LossEval glm_loss(double z, double r, const GlmModel& model) {
    LossEval e;
    e.value = -r * z + model.m(z);
    e.d1 = model.h(z) - r;
    e.d2 = model.h_prime(z);
    return e;
}

Eigen::VectorXd ftrl_step(const std::vector<Eigen::VectorXd>& actions,
                          const std::vector<double>& rewards,
                          const GlmModel& model) {
    if (actions.size() != rewards.size()) {
        throw std::invalid_argument("ftrl_step: actions/rewards size mismatch");
    }
    const int d = model.d;
    const double reg = 2.0 * model.A * model.A * model.K * model.K / model.kappa;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
    if (actions.empty()) return theta;  // pure quadratic: minimizer is 0

    const auto objective = [&](const Eigen::VectorXd& th) {
        double f = reg * th.squaredNorm();
        for (std::size_t s = 0; s < actions.size(); ++s) {
            f += glm_loss(actions[s].dot(th), rewards[s], model).value;
        }
        return f;
    };

    constexpr double kTol = 1e-10;
    constexpr int kMaxIter = 200;
    double grad_norm = std::numeric_limits<double>::infinity();
    double fval = objective(theta);
    Eigen::VectorXd grad(d);
    Eigen::MatrixXd hess(d, d);
    for (int iter = 0; iter < kMaxIter; ++iter) {
        grad = 2.0 * reg * theta;
        hess = 2.0 * reg * Eigen::MatrixXd::Identity(d, d);
        for (std::size_t s = 0; s < actions.size(); ++s) {
            const LossEval e = glm_loss(actions[s].dot(theta), rewards[s], model);
            grad.noalias() += e.d1 * actions[s];
            hess.noalias() += e.d2 * actions[s] * actions[s].transpose();
        }
        grad_norm = grad.norm();
        if (grad_norm <= kTol) return theta;

        const Eigen::VectorXd dir = hess.llt().solve(-grad);
        // Backtracking keeps Newton monotone while iterates cross the
        // linearly extended region of the link. The epsilon slack lets full
        // steps through once the decrease falls below double resolution,
        // where quadratic convergence still tightens the gradient.
        const double f_tol =
            16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(fval));
        double step = 1.0;
        const double slope = grad.dot(dir);
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            const Eigen::VectorXd cand = theta + step * dir;
            const double fc = objective(cand);
            if (fc <= fval + 1e-4 * step * slope + f_tol) {
                moved = (cand - theta).norm() > 0.0;
                theta = cand;
                fval = std::min(fval, fc);
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;  // stagnated at the numerical floor
    }
    // Final tolerance check after the iteration budget.
    grad = 2.0 * reg * theta;
    for (std::size_t s = 0; s < actions.size(); ++s) {
        grad.noalias() += glm_loss(actions[s].dot(theta), rewards[s], model).d1 *
                          actions[s];
    }
    grad_norm = grad.norm();
    if (grad_norm <= kTol) return theta;
    throw NonConvergenceError(grad_norm, kMaxIter);
}

LevelLearnerState::LevelLearnerState(int d_, double lambda_)
    : d(d_),
      lambda(lambda_),
      theta(Eigen::VectorXd::Zero(d_)),
      vbar(lambda_ * Eigen::MatrixXd::Identity(d_, d_)),
      xtz(Eigen::VectorXd::Zero(d_)),
      theta_hat(Eigen::VectorXd::Zero(d_)) {
    if (!(lambda_ > 0.0)) {
        throw std::invalid_argument("LevelLearnerState: lambda must be positive");
    }
    vbar_llt.compute(vbar);
}

Eigen::MatrixXd LevelLearnerState::recompute_vbar() const {
    Eigen::MatrixXd v = lambda * Eigen::MatrixXd::Identity(d, d);
    for (const auto& a : actions) v.noalias() += a * a.transpose();
    return v;
}

EllipsoidConfidenceSet gloc_update(LevelLearnerState& state, int t,
                                   const Eigen::VectorXd& a, double r,
                                   const GlmModel& model, double beta_t,
                                   bool clip_predictions) {
    if (a.size() != state.d) {
        throw std::invalid_argument("gloc_update: action dimension mismatch");
    }
    if (a.norm() > model.A * (1.0 + 1e-9)) {
        throw std::invalid_argument("gloc_update: action norm exceeds A");
    }
    state.prequential.push_back(state.theta);
    state.actions.push_back(a);
    state.rewards.push_back(r);
    state.rounds.push_back(t);
    state.theta = ftrl_step(state.actions, state.rewards, model);

    double z = a.dot(state.theta);
    if (clip_predictions) {
        z = std::clamp(z, -model.A * model.B, model.A * model.B);
    }
    state.z.push_back(z);
    state.z_sq_sum += z * z;
    state.xtz.noalias() += z * a;
    state.vbar.noalias() += a * a.transpose();
    state.vbar_llt.compute(state.vbar);
    state.theta_hat = state.vbar_llt.solve(state.xtz);

    return EllipsoidConfidenceSet{state.theta_hat, state.vbar, beta_t};
}

void GlmBetaParams::validate() const {
    if (!(delta > 0.0) || !(delta < 0.25)) {
        throw std::invalid_argument("GlmBetaParams: delta must be in (0, 1/4)");
    }
    if (!(K > 0.0) || !(kappa > 0.0) || !(A > 0.0) || !(B > 0.0) || !(R > 0.0) ||
        !(sigma_bar > 0.0) || !(lambda > 0.0) || d < 1 || L < 1) {
        throw std::invalid_argument("GlmBetaParams: all parameters must be positive");
    }
}

GlmBetaParams GlmBetaParams::from_model(const GlmModel& m, double R,
                                        double sigma_bar, double delta, int L,
                                        double lambda) {
    GlmBetaParams p;
    p.K = m.K;
    p.kappa = m.kappa;
    p.A = m.A;
    p.B = m.B;
    p.R = R;
    p.sigma_bar = sigma_bar;
    p.d = m.d;
    p.delta = delta;
    p.L = L;
    p.lambda = lambda;
    p.validate();
    return p;
}

double beta_glm(int t, int level, const GlmBetaParams& p) {
    p.validate();
    if (t < 1) throw std::invalid_argument("beta_glm: t must be >= 1");
    if (level < 0 || level >= p.L) {
        throw std::invalid_argument("beta_glm: level out of range");
    }
    const double td = static_cast<double>(t);
    const double k2 = p.kappa * p.kappa;
    const double lg = std::log(4.0 * td * td * static_cast<double>(p.L) / p.delta);
    const double growth =
        std::log(1.0 + td * p.A * k2 / (4.0 * static_cast<double>(p.d) * p.K * p.K));
    double v = 1.0 + 32.0 * p.A * p.A * p.K * p.K * p.B * p.B / k2;
    v += 26.0 / k2 * p.R * p.R * lg * lg;
    v += 12.0 * std::ldexp(1.0, 2 * (level + 1)) * p.sigma_bar * p.sigma_bar / k2 *
         static_cast<double>(p.d) * growth;
    v += p.lambda * p.B * p.B;
    return v;
}

double ucb_value_glm(const EllipsoidConfidenceSet& set, const Eigen::VectorXd& a,
                     const GlmModel& model) {
    if (set.beta < 0.0) throw std::invalid_argument("ucb_value_glm: beta must be >= 0");
    const Eigen::VectorXd vinv_a = set.shape.llt().solve(a);
    const double norm = std::sqrt(std::max(0.0, a.dot(vinv_a)));
    const double u = a.dot(set.center) + std::sqrt(set.beta) * norm;
    return model.h(std::clamp(u, -model.A * model.B, model.A * model.B));
}

FtrlOnlineLearner::FtrlOnlineLearner(GlmModel model)
    : model_(std::move(model)), theta_(Eigen::VectorXd::Zero(model_.d)) {}

void FtrlOnlineLearner::observe(const Eigen::VectorXd& a, double r) {
    trace_.actions.push_back(a);
    trace_.iterates.push_back(theta_);  // fitted before r arrived
    trace_.rewards.push_back(r);
    theta_ = ftrl_step(trace_.actions, trace_.rewards, model_);
}

std::vector<double> online_regression_regret_curve(const RegressionTrace& trace,
                                                   const Eigen::VectorXd& theta_star,
                                                   const GlmModel& model) {
    if (trace.actions.size() != trace.rewards.size() ||
        trace.actions.size() != trace.iterates.size()) {
        throw std::invalid_argument("online_regression_regret: ragged trace");
    }
    std::vector<double> curve(trace.actions.size());
    double acc = 0.0;
    for (std::size_t s = 0; s < trace.actions.size(); ++s) {
        const double z_pred = trace.actions[s].dot(trace.iterates[s]);
        const double z_star = trace.actions[s].dot(theta_star);
        acc += glm_loss(z_pred, trace.rewards[s], model).value -
               glm_loss(z_star, trace.rewards[s], model).value;
        curve[s] = acc;
    }
    return curve;
}

double online_regression_regret(const RegressionTrace& trace,
                                const Eigen::VectorXd& theta_star,
                                const GlmModel& model) {
    if (trace.actions.empty()) return 0.0;
    return online_regression_regret_curve(trace, theta_star, model).back();
}

double ftrl_regret_bound(int t, double sigma_max, double R, const GlmModel& model,
                         double delta) {
    if (t < 1) throw std::invalid_argument("ftrl_regret_bound: t must be >= 1");
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw std::invalid_argument("ftrl_regret_bound: delta must be in (0,1)");
    }
    const double td = static_cast<double>(t);
    const double lg = std::log(4.0 * td * td / delta);
    const double growth = std::log(
        1.0 + td * model.A * model.kappa * model.kappa /
                  (4.0 * static_cast<double>(model.d) * model.K * model.K));
    return 8.0 * model.A * model.A * model.K * model.K * model.B * model.B /
               model.kappa +
           9.0 / (2.0 * model.kappa) * R * R * lg * lg +
           3.0 * sigma_max * sigma_max / model.kappa * static_cast<double>(model.d) *
               growth;
}

PredictionBoundCheck check_prediction_error_bound(const RegressionTrace& trace,
                                                  const Eigen::VectorXd& theta_star,
                                                  const GlmModel& model, double R,
                                                  double delta) {
    const auto reg = online_regression_regret_curve(trace, theta_star, model);
    PredictionBoundCheck out;
    double lhs = 0.0;
    for (std::size_t s = 0; s < trace.actions.size(); ++s) {
        const double e = trace.actions[s].dot(trace.iterates[s] - theta_star);
        lhs += e * e;
        const double td = static_cast<double>(s + 1);
        const double rhs = 4.0 / model.kappa * reg[s] +
                           8.0 * R * R / (model.kappa * model.kappa) *
                               std::log(4.0 * td * td / delta);
        if (lhs > rhs) {
            out.holds = false;
            out.first_violation = static_cast<int>(s + 1);
            return out;
        }
    }
    return out;
}

GlocSubroutine::GlocSubroutine(GlmModel model, GlmBetaParams beta,
                               bool clip_predictions,
                               std::optional<Eigen::VectorXd> truth)
    : model_(std::move(model)),
      beta_(beta),
      clip_(clip_predictions),
      truth_(std::move(truth)) {
    beta_.validate();
    if (truth_ && truth_->size() != model_.d) {
        throw std::invalid_argument("GlocSubroutine: truth dimension mismatch");
    }
}

void GlocSubroutine::begin(int num_levels) {
    if (num_levels != beta_.L) {
        throw std::invalid_argument("GlocSubroutine: level count disagrees with schedule L");
    }
    levels_.assign(static_cast<std::size_t>(num_levels),
                   LevelLearnerState(model_.d, beta_.lambda));
}

std::optional<double> GlocSubroutine::optimistic_value(
    int level, int t, const Eigen::VectorXd& a) const {
    const auto& st = levels_.at(static_cast<std::size_t>(level));
    const double beta = beta_glm(t, level, beta_);
    const Eigen::VectorXd vinv_a = st.vbar_llt.solve(a);
    const double norm = std::sqrt(std::max(0.0, a.dot(vinv_a)));
    const double u = a.dot(st.theta_hat) + std::sqrt(beta) * norm;
    return model_.h(std::clamp(u, -model_.A * model_.B, model_.A * model_.B));
}

std::optional<bool> GlocSubroutine::refresh(int level, int t,
                                            const LevelData<Eigen::VectorXd>& data) {
    auto& st = levels_.at(static_cast<std::size_t>(level));
    gloc_update(st, t, data.actions.back(), data.rewards.back(), model_,
                beta_glm(t, level, beta_), clip_);
    // The refreshed set at round t includes the round-t datum; coverage is
    // reported for that set.
    return truth_in_current_set(level, t);
}

std::optional<bool> GlocSubroutine::truth_in_current_set(int level, int t) const {
    if (!truth_) return std::nullopt;
    const auto& st = levels_.at(static_cast<std::size_t>(level));
    const Eigen::VectorXd diff = *truth_ - st.theta_hat;
    const double norm2 = diff.dot(st.vbar * diff);
    return norm2 <= beta_glm(t, level, beta_);
}

}  // namespace hetbandit
