// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/sim.hpp>

#include "json_reader.hpp"

namespace relaylab::sim {

using nlohmann::json;
using json_reader::bad;
using json_reader::Obj;

namespace {

constexpr std::pair<Script, const char*> script_names[] = {
    {Script::equivocate, "equivocate"},
    {Script::withhold_pieces, "withhold-pieces"},
    {Script::invalid_candidate, "invalid-candidate"},
    {Script::censor, "censor"},
    {Script::delay_maximal, "delay-maximal"},
    {Script::clock_drift, "clock-drift"},
    {Script::finality_stall, "finality-stall"},
    {Script::split_brain, "split-brain"},
};

json ratio_json(Ratio r) { return json::array({r.num, r.den}); }

bool is_fraction(Ratio r) { return r.den > 0 && r.num <= r.den; }

} // namespace

const char* to_string(Script s)
{
    for (const auto& [k, name] : script_names)
        if (k == s)
            return name;
    return "?";
}

Script parse_script(std::string_view s)
{
    for (const auto& [k, name] : script_names)
        if (s == name)
            return k;
    bad("unknown adversary script '" + std::string(s) + "'");
}

uint64_t ScenarioConfig::tolerance() const
{
    if (clock.tolerance)
        return *clock.tolerance;
    // honest readings may part by twice the offset bound plus twice the drift over the run
    uint64_t run_ticks = (slots + 1) * slot_ticks;
    uint64_t drift = (static_cast<uint64_t>(clock.max_drift_ppm) * run_ticks + 999'999) / 1'000'000;
    return 2 * delta + 2 * static_cast<uint64_t>(clock.max_offset) + 2 * drift;
}

void ScenarioConfig::validate() const
{
    if (validators == 0)
        bad("validators must be positive");
    auto cands = candidates.value_or(validators + 2);
    if (cands < validators)
        bad("candidates must be at least validators");
    if (slot_ticks == 0 || delta == 0 || epoch_length == 0)
        bad("slot_ticks, delta and epoch_length must be positive");
    if (delta >= slot_ticks)
        bad("delta must be below slot_ticks");
    if (!is_fraction(leader_rate) || !is_fraction(nominators.honest_stake))
        bad("fractions must lie in [0, 1]");
    if (nominators.count == 0 || nominators.approvals == 0)
        bad("nominators need a positive count and approval count");
    if (nominators.stake_min == 0 || nominators.stake_min > nominators.stake_max)
        bad("nominator stakes must satisfy 0 < stake_min <= stake_max");
    if (parachains.count > 0 && parachains.count > validators)
        bad("more parachains than validators");
    if (!parachains.kinds.empty() && parachains.kinds.size() != parachains.count)
        bad("parachains.kinds must list one kind per parachain");
    for (auto p : parachains.adversarial_collators)
        if (p >= parachains.count)
            bad("adversarial collator for unknown parachain " + std::to_string(p));
    if (!is_fraction(parachains.message_rate) || !is_fraction(fishermen.report_probability))
        bad("fractions must lie in [0, 1]");
    if (parachains.max_batches == 0)
        bad("parachains.max_batches must be positive");
    if (adversary.count > validators)
        bad("more adversaries than validators");
    if (!adversary.scripts.empty() && adversary.count == 0 && !adversary.scripts.contains(Script::invalid_candidate))
        bad("adversary scripts given without adversaries");
    bool outside = adversary.scripts.contains(Script::split_brain) || adversary.rig_checkers || adversary.capture_group;
    if (outside && !adversary.allow_out_of_model)
        bad("split-brain, rig_checkers and capture_group exceed the adversary model; set allow_out_of_model");
    if (adversary.capture_group && parachains.count == 0)
        bad("capture_group needs a parachain");
    if (adversary.scripts.contains(Script::split_brain) && adversary.count == validators)
        bad("split-brain needs honest validators to partition");
    if (clock.max_offset < 0 || clock.max_drift_ppm < 0 || clock.max_drift_ppm >= 1'000'000)
        bad("clock bounds must be non-negative and drift below 10^6 ppm");
    if (adversary.drift_ppm <= -1'000'000)
        bad("adversary drift must be above -10^6 ppm");
    if (economics.slots_per_era == 0)
        bad("economics.slots_per_era must be positive");
    economics.issuance.validate();
    if (!is_fraction(economics.commission) || !is_fraction(economics.invalidity_slash) ||
        !is_fraction(economics.equivocation_slash))
        bad("fractions must lie in [0, 1]");
    if (workload.transfers_per_slot.num > 4 * workload.transfers_per_slot.den)
        bad("workload.transfers_per_slot must be at most 4");
    for (const auto& r : referenda) {
        if (!is_fraction(r.turnout) || !is_fraction(r.aye_share))
            bad("referendum fractions must lie in [0, 1]");
        if (r.set_code && *r.set_code > 1)
            bad("set_code variant must be 0 or 1");
    }
}

ScenarioConfig ScenarioConfig::from_json(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        bad(std::string("scenario is not valid JSON: ") + e.what());
    }
    ScenarioConfig c;
    try {
        Obj o(doc, "scenario");
        o.text("name", c.name);
        o.num("seed", c.seed);
        o.num("validators", c.validators);
        if (const auto* v = o.get("candidates")) {
            if (!v->is_number_unsigned())
                bad("scenario.candidates: expected a non-negative integer");
            c.candidates = v->get<uint32_t>();
        }
        o.num("slots", c.slots);
        o.num("slot_ticks", c.slot_ticks);
        o.num("delta", c.delta);
        o.num("epoch_length", c.epoch_length);
        o.ratio("leader_rate", c.leader_rate);
        o.flag("finality", c.finality);
        o.num("common_prefix_depth", c.common_prefix_depth);
        o.num("growth_floor", c.growth_floor);
        if (const auto* v = o.get("nominators")) {
            Obj n(*v, "nominators");
            n.num("count", c.nominators.count);
            n.num("stake_min", c.nominators.stake_min);
            n.num("stake_max", c.nominators.stake_max);
            n.num("approvals", c.nominators.approvals);
            n.ratio("honest_stake", c.nominators.honest_stake);
            n.num("candidate_self_stake", c.nominators.candidate_self_stake);
        }
        if (const auto* v = o.get("parachains")) {
            Obj p(*v, "parachains");
            p.num("count", c.parachains.count);
            if (const auto* k = p.get("kinds")) {
                if (!k->is_array())
                    bad("parachains.kinds: expected an array");
                for (const auto& s : *k) {
                    if (!s.is_string())
                        bad("parachains.kinds: expected strings");
                    try {
                        c.parachains.kinds.push_back(para::parse_stvf(s.get<std::string>()));
                    } catch (const Error& e) {
                        bad(std::string("parachains.kinds: ") + e.what());
                    }
                }
            }
            p.ratio("message_rate", c.parachains.message_rate);
            if (const auto* a = p.get("adversarial_collators")) {
                if (!a->is_array())
                    bad("parachains.adversarial_collators: expected an array");
                for (const auto& x : *a) {
                    if (!x.is_number_unsigned())
                        bad("parachains.adversarial_collators: expected parachain ids");
                    c.parachains.adversarial_collators.insert(x.get<uint32_t>());
                }
            }
            p.num("checker_base", c.parachains.checker_base);
            p.num("availability_timeout_slots", c.parachains.availability_timeout_slots);
            p.num("max_batches", c.parachains.max_batches);
        }
        if (const auto* v = o.get("fishermen")) {
            Obj f(*v, "fishermen");
            f.num("count", c.fishermen.count);
            f.ratio("report_probability", c.fishermen.report_probability);
            f.num("delay_ticks", c.fishermen.delay_ticks);
            f.num("bond", c.fishermen.bond);
        }
        if (const auto* v = o.get("adversary")) {
            Obj a(*v, "adversary");
            a.num("count", c.adversary.count);
            if (const auto* s = a.get("scripts")) {
                if (!s->is_array())
                    bad("adversary.scripts: expected an array");
                for (const auto& x : *s) {
                    if (!x.is_string())
                        bad("adversary.scripts: expected strings");
                    c.adversary.scripts.insert(parse_script(x.get<std::string>()));
                }
            }
            a.num("drift_ppm", c.adversary.drift_ppm);
            a.num("stall_rounds", c.adversary.stall_rounds);
            a.flag("rig_checkers", c.adversary.rig_checkers);
            a.flag("capture_group", c.adversary.capture_group);
            a.flag("allow_out_of_model", c.adversary.allow_out_of_model);
        }
        if (const auto* v = o.get("clock")) {
            Obj k(*v, "clock");
            k.num("max_drift_ppm", c.clock.max_drift_ppm);
            k.num("max_offset", c.clock.max_offset);
            k.num("sync_gap_slots", c.clock.sync_gap_slots);
            if (const auto* t = k.get("tolerance")) {
                if (!t->is_number_unsigned())
                    bad("clock.tolerance: expected a non-negative integer");
                c.clock.tolerance = t->get<uint64_t>();
            }
        }
        if (const auto* v = o.get("workload")) {
            Obj w(*v, "workload");
            w.num("users", c.workload.users);
            w.ratio("transfers_per_slot", c.workload.transfers_per_slot);
            w.num("user_balance", c.workload.user_balance);
        }
        if (const auto* v = o.get("economics")) {
            Obj e(*v, "economics");
            e.ratio("target_staking", c.economics.issuance.target_staking);
            e.ratio("ideal_interest", c.economics.issuance.ideal_interest);
            e.ratio("base_inflation", c.economics.issuance.base_inflation);
            e.ratio("decay", c.economics.issuance.decay);
            e.num("eras_per_year", c.economics.issuance.eras_per_year);
            e.num("slots_per_era", c.economics.slots_per_era);
            e.num("other_supply", c.economics.other_supply);
            e.ratio("commission", c.economics.commission);
            e.ratio("invalidity_slash", c.economics.invalidity_slash);
            e.ratio("equivocation_slash", c.economics.equivocation_slash);
        }
        if (const auto* v = o.get("referenda")) {
            if (!v->is_array())
                bad("referenda: expected an array");
            for (size_t i = 0; i < v->size(); ++i) {
                Obj r((*v)[i], "referenda[" + std::to_string(i) + "]");
                Referendum ref;
                r.num("slot", ref.slot);
                std::string bias = gov::to_string(ref.bias);
                r.text("bias", bias);
                try {
                    ref.bias = gov::parse_bias(bias);
                } catch (const Error& e) {
                    bad(std::string("referenda: ") + e.what());
                }
                r.ratio("turnout", ref.turnout);
                r.ratio("aye_share", ref.aye_share);
                if (const auto* sc = r.get("set_code")) {
                    if (!sc->is_number_unsigned())
                        bad("referenda.set_code: expected a variant number");
                    ref.set_code = sc->get<uint32_t>();
                }
                c.referenda.push_back(ref);
            }
        }
    } catch (const json::exception& e) {
        bad(std::string("scenario: ") + e.what());
    }
    c.validate();
    return c;
}

std::string ScenarioConfig::to_json() const
{
    json j;
    j["name"] = name;
    j["seed"] = seed;
    j["validators"] = validators;
    if (candidates)
        j["candidates"] = *candidates;
    j["slots"] = slots;
    j["slot_ticks"] = slot_ticks;
    j["delta"] = delta;
    j["epoch_length"] = epoch_length;
    j["leader_rate"] = ratio_json(leader_rate);
    j["finality"] = finality;
    j["common_prefix_depth"] = common_prefix_depth;
    j["growth_floor"] = growth_floor;
    j["nominators"] = {{"count", nominators.count},
                       {"stake_min", nominators.stake_min},
                       {"stake_max", nominators.stake_max},
                       {"approvals", nominators.approvals},
                       {"honest_stake", ratio_json(nominators.honest_stake)},
                       {"candidate_self_stake", nominators.candidate_self_stake}};
    json kinds = json::array();
    for (auto k : parachains.kinds)
        kinds.push_back(para::to_string(k));
    j["parachains"] = {{"count", parachains.count},
                       {"kinds", kinds},
                       {"message_rate", ratio_json(parachains.message_rate)},
                       {"adversarial_collators", parachains.adversarial_collators},
                       {"checker_base", parachains.checker_base},
                       {"availability_timeout_slots", parachains.availability_timeout_slots},
                       {"max_batches", parachains.max_batches}};
    j["fishermen"] = {{"count", fishermen.count},
                      {"report_probability", ratio_json(fishermen.report_probability)},
                      {"delay_ticks", fishermen.delay_ticks},
                      {"bond", fishermen.bond}};
    json scripts = json::array();
    for (auto s : adversary.scripts)
        scripts.push_back(to_string(s));
    j["adversary"] = {{"count", adversary.count},
                      {"scripts", scripts},
                      {"drift_ppm", adversary.drift_ppm},
                      {"stall_rounds", adversary.stall_rounds},
                      {"rig_checkers", adversary.rig_checkers},
                      {"capture_group", adversary.capture_group},
                      {"allow_out_of_model", adversary.allow_out_of_model}};
    j["clock"] = {{"max_drift_ppm", clock.max_drift_ppm},
                  {"max_offset", clock.max_offset},
                  {"sync_gap_slots", clock.sync_gap_slots}};
    if (clock.tolerance)
        j["clock"]["tolerance"] = *clock.tolerance;
    j["workload"] = {{"users", workload.users},
                     {"transfers_per_slot", ratio_json(workload.transfers_per_slot)},
                     {"user_balance", workload.user_balance}};
    const auto& is = economics.issuance;
    j["economics"] = {{"target_staking", ratio_json(is.target_staking)},
                      {"ideal_interest", ratio_json(is.ideal_interest)},
                      {"base_inflation", ratio_json(is.base_inflation)},
                      {"decay", ratio_json(is.decay)},
                      {"eras_per_year", is.eras_per_year},
                      {"slots_per_era", economics.slots_per_era},
                      {"other_supply", economics.other_supply},
                      {"commission", ratio_json(economics.commission)},
                      {"invalidity_slash", ratio_json(economics.invalidity_slash)},
                      {"equivocation_slash", ratio_json(economics.equivocation_slash)}};
    json refs = json::array();
    for (const auto& r : referenda) {
        json x = {{"slot", r.slot},
                  {"bias", gov::to_string(r.bias)},
                  {"turnout", ratio_json(r.turnout)},
                  {"aye_share", ratio_json(r.aye_share)}};
        if (r.set_code)
            x["set_code"] = *r.set_code;
        refs.push_back(x);
    }
    j["referenda"] = refs;
    return j.dump(2) + "\n";
}

} // namespace relaylab::sim
