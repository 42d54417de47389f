#include "framebench/composer.hpp"

#include <algorithm>
#include <tuple>

#include "framebench/error.hpp"
#include "framebench/hash.hpp"
#include "framebench/text.hpp"

namespace framebench {

std::string_view to_string(Order o) noexcept { return o == Order::AFirst ? "a-first" : "b-first"; }

std::optional<Order> parse_order(std::string_view s) noexcept {
  if (s == "a-first") return Order::AFirst;
  if (s == "b-first") return Order::BFirst;
  return std::nullopt;
}

std::string_view to_string(Placement p) noexcept {
  switch (p) {
    case Placement::Second: return "second";
    case Placement::First: return "first";
    case Placement::Both: return "both";
  }
  return "?";
}

std::optional<Placement> parse_placement(std::string_view s) noexcept {
  if (s == "second") return Placement::Second;
  if (s == "first") return Placement::First;
  if (s == "both") return Placement::Both;
  return std::nullopt;
}

std::string_view condition_class(ConditionKind k) noexcept {
  switch (k) {
    case ConditionKind::NoPrefix: return "no-prefix";
    case ConditionKind::Control: return "control";
    case ConditionKind::Influence: return "influence";
  }
  return "?";
}

std::string Condition::label() const {
  if (kind == ConditionKind::NoPrefix) return "no-prefix";
  return std::string(condition_class(kind)) + ":" + id;
}

std::optional<Condition> Condition::parse(std::string_view label) {
  if (label == "no-prefix") return no_prefix();
  const auto colon = label.find(':');
  if (colon == std::string_view::npos || colon + 1 == label.size()) return std::nullopt;
  const auto head = label.substr(0, colon);
  std::string id(label.substr(colon + 1));
  if (head == "control") return control(std::move(id));
  if (head == "influence") return influence(std::move(id));
  return std::nullopt;
}

bool plan_less(const TrialSpec& a, const TrialSpec& b) {
  return std::tie(a.model_id, a.pair_id, a.condition, a.order, a.replicate_index, a.placement) <
         std::tie(b.model_id, b.pair_id, b.condition, b.order, b.replicate_index, b.placement);
}

PromptText compose_prompt(const DirectivePair& pair, Order order, const Condition& condition,
                          const Corpus& corpus, Placement placement) {
  PromptText out;
  out.prior_directive = order == Order::AFirst ? pair.directive_a : pair.directive_b;
  out.framed_directive = order == Order::AFirst ? pair.directive_b : pair.directive_a;

  switch (condition.kind) {
    case ConditionKind::NoPrefix:
      break;
    case ConditionKind::Control: {
      const auto* c = corpus.find_control(condition.id);
      if (!c) throw Error(ErrorKind::Invalid, "unknown control id \"" + condition.id + "\"");
      out.prefix_text = c->text;
      break;
    }
    case ConditionKind::Influence: {
      const auto* p = corpus.find_prefix(condition.id);
      if (!p) throw Error(ErrorKind::Invalid, "unknown prefix id \"" + condition.id + "\"");
      out.prefix_text = p->text;
      break;
    }
  }

  if (!out.prefix_text) {
    out.text = out.prior_directive + "\n\n" + out.framed_directive;
    return out;
  }
  const std::string& prefix = *out.prefix_text;
  const bool on_first = placement != Placement::Second;
  const bool on_second = placement != Placement::First;
  out.text = (on_first ? prefix + " " : std::string()) + out.prior_directive + "\n\n" +
             (on_second ? prefix + " " : std::string()) + out.framed_directive;
  return out;
}

PromptText compose_prompt(const TrialSpec& spec, const Corpus& corpus) {
  const auto* pair = corpus.find_pair(spec.pair_id);
  if (!pair) throw Error(ErrorKind::Invalid, "unknown pair id \"" + spec.pair_id + "\"");
  return compose_prompt(*pair, spec.order, spec.condition, corpus, spec.placement);
}

std::optional<OrderSelector> parse_order_selector(std::string_view s) noexcept {
  if (s == "both") return OrderSelector::Both;
  if (s == "a-first") return OrderSelector::AFirst;
  if (s == "b-first") return OrderSelector::BFirst;
  return std::nullopt;
}

std::optional<ConditionSelector> ConditionSelector::parse(std::string_view s) {
  ConditionSelector sel{false, false, false, {}, {}};
  for (const auto& part : text::split(s, ',')) {
    if (part == "all") {
      sel.no_prefix = sel.control = sel.influence = true;
    } else if (part == "no-prefix") {
      sel.no_prefix = true;
    } else if (part == "control") {
      sel.control = true;
    } else if (part == "influence") {
      sel.influence = true;
    } else {
      return std::nullopt;
    }
  }
  return sel;
}

std::vector<TrialSpec> plan_trials(const Corpus& corpus, std::span<const std::string> models,
                                   const PlanOptions& options) {
  if (models.empty()) throw Error(ErrorKind::Invalid, "plan_trials: no models selected");
  if (options.replicates < 1) throw Error(ErrorKind::Invalid, "plan_trials: replicates must be >= 1");

  std::vector<std::string> pair_ids = options.pair_ids;
  if (pair_ids.empty()) {
    for (const auto& p : corpus.pairs) pair_ids.push_back(p.id);
  }
  for (const auto& id : pair_ids) {
    if (!corpus.find_pair(id)) throw Error(ErrorKind::Invalid, "unknown pair id \"" + id + "\"");
  }

  std::vector<Condition> conditions;
  const auto& sel = options.conditions;
  if (sel.no_prefix) conditions.push_back(Condition::no_prefix());
  if (sel.control) {
    if (sel.control_ids.empty()) {
      for (const auto& c : corpus.controls) conditions.push_back(Condition::control(c.id));
    } else {
      for (const auto& id : sel.control_ids) {
        if (!corpus.find_control(id)) throw Error(ErrorKind::Invalid, "unknown control id \"" + id + "\"");
        conditions.push_back(Condition::control(id));
      }
    }
  }
  if (sel.influence) {
    if (sel.prefix_ids.empty()) {
      for (const auto& p : corpus.prefixes) conditions.push_back(Condition::influence(p.id));
    } else {
      for (const auto& id : sel.prefix_ids) {
        if (!corpus.find_prefix(id)) throw Error(ErrorKind::Invalid, "unknown prefix id \"" + id + "\"");
        conditions.push_back(Condition::influence(id));
      }
    }
  }

  std::vector<Order> orders;
  if (options.orders != OrderSelector::BFirst) orders.push_back(Order::AFirst);
  if (options.orders != OrderSelector::AFirst) orders.push_back(Order::BFirst);

  std::vector<TrialSpec> plan;
  plan.reserve(pair_ids.size() * conditions.size() * orders.size() * models.size() *
               static_cast<std::size_t>(options.replicates));
  for (const auto& model : models) {
    for (const auto& pair : pair_ids) {
      for (const auto& cond : conditions) {
        for (Order o : orders) {
          for (int r = 0; r < options.replicates; ++r) {
            plan.push_back({pair, o, cond, model, r, options.placement});
          }
        }
      }
    }
  }
  if (plan.empty()) throw Error(ErrorKind::Invalid, "plan_trials: selection is empty");
  std::sort(plan.begin(), plan.end(), plan_less);
  plan.erase(std::unique(plan.begin(), plan.end()), plan.end());
  return plan;
}

namespace {

void put_field(std::string& out, std::string_view value) {
  out += std::to_string(value.size());
  out += ':';
  out += value;
  out += ';';
}

}  // namespace

std::string canonical_spec(const TrialSpec& spec) {
  std::string out = "framebench-trial/1;";
  put_field(out, spec.pair_id);
  put_field(out, to_string(spec.order));
  put_field(out, spec.condition.label());
  put_field(out, spec.model_id);
  put_field(out, std::to_string(spec.replicate_index));
  put_field(out, to_string(spec.placement));
  return out;
}

std::string trial_key(const TrialSpec& spec, const PromptText& prompt) {
  std::string material = canonical_spec(spec);
  put_field(material, kPromptFormat);
  put_field(material, prompt.text);
  return sha256_hex(material);
}

std::string trial_key(const TrialSpec& spec, const Corpus& corpus) {
  return trial_key(spec, compose_prompt(spec, corpus));
}

nlohmann::json to_json(const TrialSpec& spec) {
  return {{"pair_id", spec.pair_id},
          {"order", std::string(to_string(spec.order))},
          {"condition", spec.condition.label()},
          {"model_id", spec.model_id},
          {"replicate_index", spec.replicate_index},
          {"placement", std::string(to_string(spec.placement))}};
}

TrialSpec trial_spec_from_json(const nlohmann::json& j) {
  TrialSpec spec;
  try {
    spec.pair_id = j.at("pair_id").get<std::string>();
    spec.model_id = j.at("model_id").get<std::string>();
    spec.replicate_index = j.value("replicate_index", 0);
    auto order = parse_order(j.at("order").get<std::string>());
    auto cond = Condition::parse(j.at("condition").get<std::string>());
    auto placement = parse_placement(j.value("placement", std::string("second")));
    if (!order || !cond || !placement) throw Error(ErrorKind::Parse, "bad order/condition/placement");
    spec.order = *order;
    spec.condition = *cond;
    spec.placement = *placement;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("trial spec: ") + e.what());
  }
  return spec;
}

}  // namespace framebench
