#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

#include "lhvswap/sphere.hpp"

namespace lhvswap {

/// Result of the Bell measurement on the two inner qubits. The four Bell
/// states plus the no-detection event partition the hidden-variable space.
enum class BellOutcome : std::uint8_t { PsiMinus, PhiMinus, PhiPlus, PsiPlus, NoResult };

inline constexpr std::size_t kBellStateCount = 4;
inline constexpr std::array<BellOutcome, kBellStateCount> kBellStates = {
    BellOutcome::PsiMinus, BellOutcome::PhiMinus, BellOutcome::PhiPlus, BellOutcome::PsiPlus};

std::string_view to_string(BellOutcome outcome);
std::optional<BellOutcome> parse_bell_outcome(std::string_view name);

/// Local rotation relating the outcome's Bell state to the singlet:
/// PhiMinus -> X, PhiPlus -> Y, PsiPlus -> Z, PsiMinus -> none (identity).
/// Throws std::invalid_argument for NoResult.
std::optional<Axis> branch_axis(BellOutcome outcome);

/// Applies the outcome's branch rotation to v.
UnitVec3 branch_frame(BellOutcome outcome, const UnitVec3& v);

enum class DetectorOutcome : std::uint8_t { Plus, Minus, NoDetect };

/// One simulated run. For a NoResult Bell measurement both detectors are
/// reported as NoDetect.
struct TrialRecord {
  BellOutcome bell = BellOutcome::NoResult;
  DetectorOutcome alice = DetectorOutcome::NoDetect;
  DetectorOutcome bob = DetectorOutcome::NoDetect;
  std::size_t setting_id = 0;

  bool operator==(const TrialRecord&) const = default;
};

/// Lossy side: detects with probability |a.lambda| (decided by the uniform
/// draw u in [0,1)) and then answers sign(a.lambda).
DetectorOutcome alice_response(const UnitVec3& a, const UnitVec3& lambda, double u);

/// Lossless side: always answers sign(b.lambda); a zero projection counts as Plus.
DetectorOutcome bob_response(const UnitVec3& b, const UnitVec3& lambda);

struct SingletParams {};

/// Partial Bell measurement that only recognises the singlet.
class PartialSwapParams {
 public:
  /// Throws std::invalid_argument unless 0 <= eta <= 1.
  explicit PartialSwapParams(double eta);
  double eta() const { return eta_; }
  /// The singlet is reported iff lambda1.lambda3 >= this value (1 - eta^2/2).
  double overlap_threshold() const { return 1.0 - eta_ * eta_ / 2.0; }

 private:
  double eta_;
};

/// Complete Bell measurement with acceptance threshold `limit`.
class CompleteSwapParams {
 public:
  /// Throws std::invalid_argument unless 0 <= limit <= 1.
  explicit CompleteSwapParams(double limit);
  double limit() const { return limit_; }

 private:
  double limit_;
};

using ModelParams = std::variant<SingletParams, PartialSwapParams, CompleteSwapParams>;

/// Bell-branch scores of a hidden-variable pair: the four products
/// lambda1 . R lambda4 for R in {1, Rx, Ry, Rz}, their minimizer, and the minimum.
struct BellScore {
  std::array<double, kBellStateCount> products{};
  BellOutcome branch = BellOutcome::PsiMinus;
  double min_product = 0.0;
};

/// Ties resolve in the order PsiMinus, PhiMinus, PhiPlus, PsiPlus.
BellScore score_bell(const UnitVec3& lambda1, const UnitVec3& lambda4);

/// Most negative branch product if it is strictly below -limit, else NoResult.
BellOutcome bell_argmin(const UnitVec3& lambda1, const UnitVec3& lambda4, double limit);

/// Partial-swap acceptance rule on lambda1 and lambda3 (lambda2 = -lambda1).
bool partial_swap_accepts(const UnitVec3& lambda1, const UnitVec3& lambda3,
                          const PartialSwapParams& params);

TrialRecord run_singlet_trial(const UnitVec3& a, const UnitVec3& b, RandomStream& stream,
                              std::size_t setting_id = 0);

TrialRecord run_partial_swap_trial(const UnitVec3& a, const UnitVec3& b,
                                   const PartialSwapParams& params, RandomStream& stream,
                                   std::size_t setting_id = 0);

TrialRecord run_complete_swap_trial(const UnitVec3& a, const UnitVec3& b,
                                    const CompleteSwapParams& params, RandomStream& stream,
                                    std::size_t setting_id = 0);

TrialRecord run_trial(const ModelParams& model, const UnitVec3& a, const UnitVec3& b,
                      RandomStream& stream, std::size_t setting_id = 0);

}  // namespace lhvswap
