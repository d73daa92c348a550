#include "lhvswap/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lhvswap {

std::string_view to_string(BellOutcome outcome) {
  switch (outcome) {
    case BellOutcome::PsiMinus: return "psi_minus";
    case BellOutcome::PhiMinus: return "phi_minus";
    case BellOutcome::PhiPlus: return "phi_plus";
    case BellOutcome::PsiPlus: return "psi_plus";
    case BellOutcome::NoResult: return "no_result";
  }
  return "unknown";
}

std::optional<BellOutcome> parse_bell_outcome(std::string_view name) {
  for (auto outcome : {BellOutcome::PsiMinus, BellOutcome::PhiMinus, BellOutcome::PhiPlus,
                       BellOutcome::PsiPlus, BellOutcome::NoResult}) {
    if (to_string(outcome) == name) return outcome;
  }
  return std::nullopt;
}

std::optional<Axis> branch_axis(BellOutcome outcome) {
  switch (outcome) {
    case BellOutcome::PsiMinus: return std::nullopt;
    case BellOutcome::PhiMinus: return Axis::X;
    case BellOutcome::PhiPlus: return Axis::Y;
    case BellOutcome::PsiPlus: return Axis::Z;
    case BellOutcome::NoResult: break;
  }
  throw std::invalid_argument("branch_axis: NoResult has no Bell-state frame");
}

UnitVec3 branch_frame(BellOutcome outcome, const UnitVec3& v) {
  const auto axis = branch_axis(outcome);
  return axis ? rotate_pi(*axis, v) : v;
}

DetectorOutcome alice_response(const UnitVec3& a, const UnitVec3& lambda, double u) {
  const double proj = dot(a, lambda);
  if (u >= std::abs(proj)) return DetectorOutcome::NoDetect;
  return proj > 0.0 ? DetectorOutcome::Plus : DetectorOutcome::Minus;
}

DetectorOutcome bob_response(const UnitVec3& b, const UnitVec3& lambda) {
  return dot(b, lambda) >= 0.0 ? DetectorOutcome::Plus : DetectorOutcome::Minus;
}

PartialSwapParams::PartialSwapParams(double eta) : eta_(eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("eta must lie in [0, 1], got " + std::to_string(eta));
  }
}

CompleteSwapParams::CompleteSwapParams(double limit) : limit_(limit) {
  if (!(limit >= 0.0 && limit <= 1.0)) {
    throw std::invalid_argument("limit must lie in [0, 1], got " + std::to_string(limit));
  }
}

BellScore score_bell(const UnitVec3& lambda1, const UnitVec3& lambda4) {
  const double px = lambda1.x() * lambda4.x();
  const double py = lambda1.y() * lambda4.y();
  const double pz = lambda1.z() * lambda4.z();
  BellScore score;
  score.products = {px + py + pz, px - py - pz, -px + py - pz, -px - py + pz};
  std::size_t best = 0;
  for (std::size_t k = 1; k < kBellStateCount; ++k) {
    if (score.products[k] < score.products[best]) best = k;
  }
  score.branch = kBellStates[best];
  score.min_product = std::max(-1.0, score.products[best]);
  return score;
}

BellOutcome bell_argmin(const UnitVec3& lambda1, const UnitVec3& lambda4, double limit) {
  const BellScore score = score_bell(lambda1, lambda4);
  return score.min_product < -limit ? score.branch : BellOutcome::NoResult;
}

bool partial_swap_accepts(const UnitVec3& lambda1, const UnitVec3& lambda3,
                          const PartialSwapParams& params) {
  // lambda2 . lambda3 <= eta^2/2 - 1 with lambda2 = -lambda1.
  return dot(lambda1, lambda3) >= params.overlap_threshold();
}

namespace {

TrialRecord no_result(std::size_t setting_id) {
  return TrialRecord{BellOutcome::NoResult, DetectorOutcome::NoDetect, DetectorOutcome::NoDetect,
                     setting_id};
}

}  // namespace

TrialRecord run_singlet_trial(const UnitVec3& a, const UnitVec3& b, RandomStream& stream,
                              std::size_t setting_id) {
  const UnitVec3 lambda1 = sample_uniform(stream);
  const UnitVec3 lambda2 = -lambda1;
  return TrialRecord{BellOutcome::PsiMinus, alice_response(a, lambda1, stream.uniform()),
                     bob_response(b, lambda2), setting_id};
}

TrialRecord run_partial_swap_trial(const UnitVec3& a, const UnitVec3& b,
                                   const PartialSwapParams& params, RandomStream& stream,
                                   std::size_t setting_id) {
  const UnitVec3 lambda1 = sample_uniform(stream);
  const UnitVec3 lambda3 = sample_uniform(stream);
  if (!partial_swap_accepts(lambda1, lambda3, params)) return no_result(setting_id);
  const UnitVec3 lambda4 = -lambda3;
  return TrialRecord{BellOutcome::PsiMinus, alice_response(a, lambda1, stream.uniform()),
                     bob_response(b, lambda4), setting_id};
}

TrialRecord run_complete_swap_trial(const UnitVec3& a, const UnitVec3& b,
                                    const CompleteSwapParams& params, RandomStream& stream,
                                    std::size_t setting_id) {
  const UnitVec3 lambda1 = sample_uniform(stream);
  const UnitVec3 lambda4 = -sample_uniform(stream);
  const BellOutcome bell = bell_argmin(lambda1, lambda4, params.limit());
  if (bell == BellOutcome::NoResult) return no_result(setting_id);
  return TrialRecord{bell, alice_response(a, lambda1, stream.uniform()), bob_response(b, lambda4),
                     setting_id};
}

TrialRecord run_trial(const ModelParams& model, const UnitVec3& a, const UnitVec3& b,
                      RandomStream& stream, std::size_t setting_id) {
  struct Visitor {
    const UnitVec3& a;
    const UnitVec3& b;
    RandomStream& stream;
    std::size_t setting_id;
    TrialRecord operator()(const SingletParams&) const {
      return run_singlet_trial(a, b, stream, setting_id);
    }
    TrialRecord operator()(const PartialSwapParams& p) const {
      return run_partial_swap_trial(a, b, p, stream, setting_id);
    }
    TrialRecord operator()(const CompleteSwapParams& p) const {
      return run_complete_swap_trial(a, b, p, stream, setting_id);
    }
  };
  return std::visit(Visitor{a, b, stream, setting_id}, model);
}

}  // namespace lhvswap
