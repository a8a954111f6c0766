#pragma once

#include <array>
#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ipmsrl {

// Position of a node on the twelve-stage ICS attack ladder. 0 is clean.
class Stage {
 public:
  static constexpr int kClean = 0;
  static constexpr int kMax = 12;

  constexpr Stage() = default;
  constexpr explicit Stage(int index) : index_(index) {
    if (index < kClean || index > kMax) {
      throw std::out_of_range("stage index out of range: " +
                              std::to_string(index));
    }
  }

  constexpr int index() const { return index_; }
  constexpr bool infected() const { return index_ > kClean; }

  constexpr auto operator<=>(const Stage&) const = default;

 private:
  int index_ = kClean;
};

inline constexpr std::array<std::string_view, 13> kTacticNames = {
    "Clean",
    "Initial Access",
    "Execution",
    "Persistence",
    "Privilege Escalation",
    "Evasion",
    "Discovery",
    "Lateral Movement",
    "Collection",
    "Command and Control",
    "Inhibit Response Function",
    "Impair Process Control",
    "Impact",
};

constexpr std::string_view tactic_name(Stage s) { return kTacticNames[s.index()]; }

enum class SeverityBand { None = 0, Low = 1, Medium = 2, High = 3 };

inline constexpr int kNumBands = 4;

constexpr std::string_view to_string(SeverityBand b) {
  switch (b) {
    case SeverityBand::None: return "none";
    case SeverityBand::Low: return "low";
    case SeverityBand::Medium: return "medium";
    case SeverityBand::High: return "high";
  }
  return "?";
}

struct KillChainConfig {
  int lateral_gate_stage = 7;
  int low_max = 4;     // Low = 1..low_max
  int medium_max = 8;  // Medium = low_max+1..medium_max, High above

  bool operator==(const KillChainConfig&) const = default;
};

// Contract: 1 <= stage <= 11. Eligibility is the caller's job.
constexpr Stage advance(Stage s) {
  if (s.index() < 1 || s.index() >= Stage::kMax) {
    throw std::logic_error("advance: stage " + std::to_string(s.index()) +
                           " cannot advance");
  }
  return Stage(s.index() + 1);
}

constexpr bool can_move_laterally(Stage s, const KillChainConfig& kc = {}) {
  return s.infected() && s.index() >= kc.lateral_gate_stage;
}

constexpr SeverityBand severity(Stage s, const KillChainConfig& kc = {}) {
  if (!s.infected()) return SeverityBand::None;
  if (s.index() <= kc.low_max) return SeverityBand::Low;
  if (s.index() <= kc.medium_max) return SeverityBand::Medium;
  return SeverityBand::High;
}

}  // namespace ipmsrl
