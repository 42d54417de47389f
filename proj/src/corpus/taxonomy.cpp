#include "framebench/corpus.hpp"

namespace framebench {

namespace {

struct StrategyInfo {
  Strategy strategy;
  Mechanism mechanism;
  std::string_view id;
  std::string_view display;
};

constexpr StrategyInfo kStrategies[] = {
    {Strategy::AuthorityEndorsement, Mechanism::Hierarchical, "AuthorityEndorsement",
     "Authority Endorsement"},
    {Strategy::DirectOverrideCommands, Mechanism::Hierarchical, "DirectOverrideCommands",
     "Direct Override Commands"},
    {Strategy::AuthoritarianStatusClaim, Mechanism::Hierarchical, "AuthoritarianStatusClaim",
     "Authoritarian Status Claim"},
    {Strategy::CommitmentConsistency, Mechanism::SocialContract, "CommitmentConsistency",
     "Commitment & Consistency"},
    {Strategy::RapportLikingTrust, Mechanism::SocialContract, "RapportLikingTrust",
     "Rapport, Liking & Trust"},
    {Strategy::Reciprocity, Mechanism::SocialContract, "Reciprocity", "Reciprocity"},
    {Strategy::SocialProofConsensus, Mechanism::SocialContract, "SocialProofConsensus",
     "Social Proof & Consensus"},
    {Strategy::DistressUrgency, Mechanism::Emotional, "DistressUrgency", "Distress & Urgency"},
    {Strategy::GuiltTripsMoralDilemmas, Mechanism::Emotional, "GuiltTripsMoralDilemmas",
     "Guilt Trips & Moral Dilemmas"},
    {Strategy::PositiveEthicalFraming, Mechanism::Emotional, "PositiveEthicalFraming",
     "Positive Ethical Framing"},
    {Strategy::ContextualLegitimization, Mechanism::Narrative, "ContextualLegitimization",
     "Contextual Legitimization"},
    {Strategy::FictionalRolePlay, Mechanism::Narrative, "FictionalRolePlay",
     "Fictional Role-play"},
    {Strategy::Hypotheticals, Mechanism::Narrative, "Hypotheticals", "Hypotheticals"},
};

const StrategyInfo& info(Strategy s) noexcept {
  return kStrategies[static_cast<std::size_t>(s)];
}

}  // namespace

Mechanism mechanism_of(Strategy s) noexcept { return info(s).mechanism; }

std::string_view to_string(Strategy s) noexcept { return info(s).id; }

std::string_view display_name(Strategy s) noexcept { return info(s).display; }

std::string_view to_string(Mechanism m) noexcept {
  switch (m) {
    case Mechanism::Hierarchical: return "Hierarchical";
    case Mechanism::SocialContract: return "SocialContract";
    case Mechanism::Emotional: return "Emotional";
    case Mechanism::Narrative: return "Narrative";
  }
  return "?";
}

std::string_view display_name(Mechanism m) noexcept {
  return m == Mechanism::SocialContract ? "Social Contract" : to_string(m);
}

std::optional<Strategy> parse_strategy(std::string_view label) noexcept {
  for (const auto& s : kStrategies) {
    if (s.id == label) return s.strategy;
  }
  return std::nullopt;
}

std::optional<Mechanism> parse_mechanism(std::string_view label) noexcept {
  for (Mechanism m : kAllMechanisms) {
    if (to_string(m) == label) return m;
  }
  return std::nullopt;
}

std::string_view to_string(Severity s) noexcept {
  switch (s) {
    case Severity::Info: return "info";
    case Severity::Warning: return "warning";
    case Severity::Error: return "error";
  }
  return "?";
}

}  // namespace framebench
