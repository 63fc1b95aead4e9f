#pragma once
// Generalized linear bandits: rewards h(theta^T a) with a known monotone
// link h whose derivative lies in [kappa, K] on (-AB, AB).
//
// Three pieces:
//  - ftrl_step: exact minimizer of phi(theta) + sum_s loss(theta^T a_s, r_s)
//    with phi(theta) = (2 A^2 K^2 / kappa) ||theta||^2 and
//    loss(z, r) = -r z + m(z), m' = h. The objective is
//    (4 A^2 K^2 / kappa)-strongly convex; damped Newton drives the gradient
//    norm below 1e-10.
//  - gloc_update: converts the per-level FTRL predictions z_s = a_s^T theta_s
//    into a ridge-style ellipsoid { theta : ||theta - theta_hat||_Vbar^2 <= beta }
//    with Vbar = lambda I + sum a a^T and theta_hat = Vbar^{-1} sum z_s a_s.
//  - beta_glm: the ellipsoid radius
//      1 + 32 A^2 K^2 B^2 / kappa^2 + (26 / kappa^2) R^2 log^2(4 t^2 L / delta)
//        + 12 (2^{2(l+1)} sb^2 / kappa^2) d log(1 + t A kappa^2 / (4 d K^2))
//        + lambda B^2.
//
// Outside (-AB, AB) the link is extended linearly with the boundary slope,
// which keeps the loss convex and the derivative floor intact while Newton
// iterates pass through.

#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hetbandit/core.hpp"
#include "hetbandit/ml2.hpp"

namespace hetbandit {

enum class LinkKind { identity, logistic, scaled_linear };

struct GlmModel {
    LinkKind link = LinkKind::identity;
    int d = 1;
    double A = 1.0;  // action norm bound
    double B = 1.0;  // parameter norm bound
    double K = 1.0;  // Lipschitz constant of h on [-AB, AB]
    double kappa = 1.0;  // inf of h' on (-AB, AB)
    double slope = 1.0;  // scaled_linear only

    double h(double z) const;
    double h_prime(double z) const;
    double m(double z) const;  // antiderivative of h, m(0) = 0 for logistic offset by log 2

    // Grid-checks kappa <= h' <= K and monotonicity on (-AB, AB).
    void validate() const;

    static GlmModel identity_link(int d, double A, double B);
    static GlmModel logistic_link(int d, double A, double B);
    static GlmModel scaled_link(int d, double A, double B, double slope);
};

struct LossEval {
    double value = 0.0;
    double d1 = 0.0;  // d/dz
    double d2 = 0.0;  // d^2/dz^2
};

// loss(z, r) = -r z + m(z); derivatives h(z) - r and h'(z).
LossEval glm_loss(double z, double r, const GlmModel& model);

class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(double grad_norm, int iterations)
        : std::runtime_error("ftrl_step: no convergence after " +
                             std::to_string(iterations) +
                             " Newton iterations, |grad| = " +
                             std::to_string(grad_norm)),
          grad_norm_(grad_norm),
          iterations_(iterations) {}
    double grad_norm() const { return grad_norm_; }

private:
    double grad_norm_;
    int iterations_;
};

// Unique minimizer of the regularized cumulative loss. Empty data returns 0.
// For the identity link this equals (4A^2K^2/kappa I + sum a a^T)^{-1} sum r a.
Eigen::VectorXd ftrl_step(const std::vector<Eigen::VectorXd>& actions,
                          const std::vector<double>& rewards,
                          const GlmModel& model);

struct EllipsoidConfidenceSet {
    Eigen::VectorXd center;  // theta_hat
    Eigen::MatrixXd shape;   // Vbar, positive definite
    double beta = 0.0;       // threshold on the squared Vbar-norm
};

// Per-level online learner state: data, current FTRL iterate (fitted on all
// of the level's data), predictions z_s, and the ridge pieces.
struct LevelLearnerState {
    int d = 1;
    double lambda = 1.0;
    std::vector<Eigen::VectorXd> actions;
    std::vector<double> rewards;
    std::vector<int> rounds;
    std::vector<double> z;
    std::vector<Eigen::VectorXd> prequential;  // iterate before each datum
    Eigen::VectorXd theta;      // current iterate, includes latest datum
    Eigen::MatrixXd vbar;       // lambda I + sum a a^T
    Eigen::VectorXd xtz;        // sum z_s a_s
    double z_sq_sum = 0.0;      // sum z_s^2
    Eigen::VectorXd theta_hat;  // vbar^{-1} xtz
    Eigen::LLT<Eigen::MatrixXd> vbar_llt;

    LevelLearnerState() = default;
    LevelLearnerState(int d_, double lambda_);

    // ||z||^2 - theta_hat^T X^T z; nonnegative up to roundoff.
    double ridge_gram_residual() const { return z_sq_sum - theta_hat.dot(xtz); }
    // Recomputes lambda I + sum a a^T from scratch (bookkeeping checks).
    Eigen::MatrixXd recompute_vbar() const;
};

// One data point for the level's learner: refit theta on the level's data
// including (a, r), set z = a^T theta (optionally clipped to [-AB, AB]),
// grow Vbar, and rebuild the ridge center. Returns the refreshed ellipsoid
// with the supplied radius.
EllipsoidConfidenceSet gloc_update(LevelLearnerState& state, int t,
                                   const Eigen::VectorXd& a, double r,
                                   const GlmModel& model, double beta_t,
                                   bool clip_predictions = false);

struct GlmBetaParams {
    double K = 1.0, kappa = 1.0, A = 1.0, B = 1.0, R = 1.0, sigma_bar = 1.0;
    int d = 1;
    double delta = 0.1;
    int L = 1;
    double lambda = 1.0;

    void validate() const;  // requires delta in (0, 1/4)
    static GlmBetaParams from_model(const GlmModel& m, double R, double sigma_bar,
                                    double delta, int L, double lambda);
};

double beta_glm(int t, int level, const GlmBetaParams& p);

// h(clip(a^T theta_hat + sqrt(beta) ||a||_{Vbar^{-1}}, -AB, AB)): the exact
// maximum of h(a^T theta) over the ellipsoid intersected with the certified
// link domain, by monotonicity of h.
double ucb_value_glm(const EllipsoidConfidenceSet& set, const Eigen::VectorXd& a,
                     const GlmModel& model);

// Prequential record of a single online-regression stream: iterates[s] was
// fitted before r_s arrived.
struct RegressionTrace {
    std::vector<Eigen::VectorXd> actions;
    std::vector<double> rewards;
    std::vector<Eigen::VectorXd> iterates;
};

// Convenience driver for the raw online learner: records the prequential
// iterate, then refits on all data seen so far.
class FtrlOnlineLearner {
public:
    explicit FtrlOnlineLearner(GlmModel model);
    void observe(const Eigen::VectorXd& a, double r);
    const RegressionTrace& trace() const { return trace_; }
    const Eigen::VectorXd& current_iterate() const { return theta_; }

private:
    GlmModel model_;
    RegressionTrace trace_;
    Eigen::VectorXd theta_;
};

// reg_t = sum_{s<=t} loss(a_s^T theta_s, r_s) - loss(a_s^T theta*, r_s),
// one entry per prefix length t = 1..T.
std::vector<double> online_regression_regret_curve(const RegressionTrace& trace,
                                                   const Eigen::VectorXd& theta_star,
                                                   const GlmModel& model);
double online_regression_regret(const RegressionTrace& trace,
                                const Eigen::VectorXd& theta_star,
                                const GlmModel& model);

// High-probability envelope for reg_t when every datum has noise deviation
// at most sigma_max:
//   8 A^2 K^2 B^2 / kappa + (9 / 2 kappa) R^2 log^2(4 t^2 / delta)
//     + 3 (sigma_max^2 / kappa) d log(1 + t A kappa^2 / (4 d K^2)).
double ftrl_regret_bound(int t, double sigma_max, double R, const GlmModel& model,
                         double delta);

struct PredictionBoundCheck {
    bool holds = true;
    int first_violation = 0;  // round index, 0 when none
};

// Checks, at every prefix t, that the cumulative squared prediction error
// sum_{s<=t} (a_s^T (theta_s - theta*))^2 stays below
// (4/kappa) reg_t + (8 R^2 / kappa^2) log(4 t^2 / delta).
PredictionBoundCheck check_prediction_error_bound(const RegressionTrace& trace,
                                                  const Eigen::VectorXd& theta_star,
                                                  const GlmModel& model, double R,
                                                  double delta);

// ML2 subroutine wrapping one FTRL learner + ellipsoid per level. Radii are
// evaluated lazily at the query round.
class GlocSubroutine final : public ConfidenceSubroutine<Eigen::VectorXd> {
public:
    GlocSubroutine(GlmModel model, GlmBetaParams beta, bool clip_predictions = false,
                   std::optional<Eigen::VectorXd> truth = std::nullopt);

    void begin(int num_levels) override;
    std::optional<double> optimistic_value(int level, int t,
                                           const Eigen::VectorXd& a) const override;
    std::optional<bool> refresh(int level, int t,
                                const LevelData<Eigen::VectorXd>& data) override;
    std::optional<bool> truth_in_current_set(int level, int t) const override;

    const LevelLearnerState& level_state(int level) const {
        return levels_.at(static_cast<std::size_t>(level));
    }
    const GlmBetaParams& beta_params() const { return beta_; }

private:
    GlmModel model_;
    GlmBetaParams beta_;
    bool clip_;
    std::optional<Eigen::VectorXd> truth_;
    std::vector<LevelLearnerState> levels_;
};

}  // namespace hetbandit
