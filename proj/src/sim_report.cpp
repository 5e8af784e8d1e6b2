// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/sim.hpp>

#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>

namespace relaylab::sim {

using nlohmann::ordered_json;

Summary Summary::of(std::vector<uint64_t> xs)
{
    Summary s;
    if (xs.empty())
        return s;
    std::sort(xs.begin(), xs.end());
    s.count = xs.size();
    s.min = xs.front();
    s.max = xs.back();
    // nearest rank
    auto rank = [&](uint64_t pct) { return xs[(pct * xs.size() + 99) / 100 - 1]; };
    s.p50 = rank(50);
    s.p95 = rank(95);
    unsigned __int128 sum = 0;
    for (auto x : xs)
        sum += x;
    s.mean_milli = static_cast<uint64_t>(sum * 1000 / xs.size());
    return s;
}

bool MetricsReport::any_violation() const
{
    return std::any_of(violations.begin(), violations.end(), [](const auto& kv) { return kv.second; });
}

namespace {

ordered_json summary_json(const Summary& s)
{
    return {{"count", s.count}, {"min", s.min},         {"p50", s.p50},
            {"p95", s.p95},     {"max", s.max},         {"mean_milli", s.mean_milli}};
}

// flat (name, value) view shared by the CSV row
std::vector<std::pair<std::string, std::string>> flat(const MetricsReport& r)
{
    std::vector<std::pair<std::string, std::string>> f;
    auto add = [&](const std::string& k, uint64_t v) { f.emplace_back(k, std::to_string(v)); };
    auto add_summary = [&](const std::string& k, const Summary& s) {
        add(k + "_count", s.count);
        add(k + "_p50", s.p50);
        add(k + "_p95", s.p95);
        add(k + "_max", s.max);
        add(k + "_mean_milli", s.mean_milli);
    };
    f.emplace_back("scenario", r.scenario);
    add("seed", r.seed);
    add("slots", r.slots);
    add("validators", r.validators);
    add("adversaries", r.adversaries.size());
    add("blocks_produced", r.blocks_produced);
    add("best_height", r.best_height);
    add("finalized_height", r.finalized_height);
    add("honest_blocks_on_chain", r.honest_blocks_on_chain);
    add("chain_length", r.chain_length);
    add("fork_blocks", r.fork_blocks);
    add_summary("finality_lag", r.finality_lag);
    add("common_prefix_violations", r.common_prefix_violations);
    add("epochs_without_honest_primary", r.epochs_without_honest_primary);
    add("min_epoch_growth", r.min_epoch_growth);
    add("min_window_growth", r.min_window_growth);
    add("conflicting_finalizations", r.safety.conflicts);
    add("culprit_weight", r.safety.culprit_weight);
    add("candidates_included", r.candidates_included);
    add("invalid_finalized", r.invalid_finalized);
    add("reverted_blocks", r.reverted_blocks);
    add("xcmp_delivered", r.xcmp_delivered);
    add_summary("xcmp_latency", r.xcmp_latency);
    add_summary("inclusion_latency", r.inclusion_latency);
    add("max_sync_spread", r.max_sync_spread);
    add("slash_total", r.slash_total);
    add("minted", r.minted);
    add("violations", static_cast<uint64_t>(std::count_if(r.violations.begin(), r.violations.end(),
                                                          [](const auto& kv) { return kv.second; })));
    f.emplace_back("trace_hash", r.trace_hash);
    return f;
}

} // namespace

std::string MetricsReport::to_json() const
{
    ordered_json j;
    j["scenario"] = scenario;
    j["seed"] = seed;
    j["slots"] = slots;
    j["ticks"] = ticks;
    j["validators"] = validators;
    j["adversaries"] = adversaries;
    j["out_of_model"] = out_of_model;
    j["chain"] = {{"blocks_produced", blocks_produced},
                  {"primary_blocks", primary_blocks},
                  {"best_height", best_height},
                  {"finalized_height", finalized_height},
                  {"honest_blocks_on_chain", honest_blocks_on_chain},
                  {"chain_length", chain_length},
                  {"fork_blocks", fork_blocks},
                  {"block_equivocations", block_equivocations},
                  {"finality_lag_slots", summary_json(finality_lag)},
                  {"epochs", epochs},
                  {"epochs_without_honest_primary", epochs_without_honest_primary},
                  {"min_epoch_growth", min_epoch_growth},
                  {"min_window_growth", min_window_growth},
                  {"common_prefix_samples", common_prefix_samples},
                  {"common_prefix_violations", common_prefix_violations}};
    j["finality"] = {{"rounds", finality_rounds},
                     {"vote_equivocations", vote_equivocations},
                     {"safety_alarms", safety_alarms},
                     {"conflicting_finalizations", safety.conflicts},
                     {"accountability",
                      {{"detected", safety.detected},
                       {"same_round", safety.same_round},
                       {"culprits", safety.culprits},
                       {"culprit_weight", safety.culprit_weight},
                       {"total_weight", safety.total_weight}}}};
    j["parachains"] = {{"candidates_included", candidates_included},
                       {"invalid_included", invalid_included},
                       {"invalid_finalized", invalid_finalized},
                       {"invalid_finalized_with_honest_checker", invalid_finalized_with_honest_checker},
                       {"reverted_blocks", reverted_blocks},
                       {"disputes", disputes},
                       {"unavailable", unavailable},
                       {"attestation_threshold", attestation_threshold},
                       {"min_attester_support", min_attester_support}};
    j["xcmp"] = {{"sent", xcmp_sent},
                 {"delivered", xcmp_delivered},
                 {"latency_blocks", summary_json(xcmp_latency)},
                 {"fifo_violations", xcmp_fifo_violations},
                 {"batch_violations", xcmp_batch_violations},
                 {"watermark_violations", xcmp_watermark_violations},
                 {"fork_violations", xcmp_fork_violations}};
    j["transactions"] = {{"submitted", txs_submitted},
                         {"included", txs_included},
                         {"inclusion_latency_slots", summary_json(inclusion_latency)}};
    j["relative_time"] = {{"sync_epochs", sync_epochs}, {"max_spread_ticks", max_sync_spread}};
    j["network"] = {{"sent", messages_sent},
                    {"delivered", messages_delivered},
                    {"in_flight", messages_in_flight},
                    {"partitioned", messages_partitioned},
                    {"max_delay", max_delay}};
    ordered_json sl = ordered_json::array();
    for (const auto& s : slashes)
        sl.push_back({{"tick", s.tick}, {"offender", s.offender}, {"reason", s.reason}, {"amount", s.amount}});
    j["economics"] = {{"eras", eras},
                      {"minted", minted},
                      {"staker_rewards", staker_rewards},
                      {"treasury", treasury},
                      {"burned", burned},
                      {"supply_start", supply_start},
                      {"supply_end", supply_end},
                      {"slash_total", slash_total},
                      {"slashes", sl}};
    j["governance"] = {{"referenda_approved", referenda_approved}, {"code_variant", code_variant}};
    ordered_json v = ordered_json::object();
    for (const auto& [k, x] : violations)
        v[k] = x;
    j["violations"] = v;
    j["trace_hash"] = trace_hash;
    return j.dump(2) + "\n";
}

std::string MetricsReport::to_csv() const
{
    auto f = flat(*this);
    std::ostringstream out;
    for (size_t i = 0; i < f.size(); ++i)
        out << (i ? "," : "") << f[i].first;
    out << "\n";
    for (size_t i = 0; i < f.size(); ++i)
        out << (i ? "," : "") << f[i].second;
    out << "\n";
    return out.str();
}

} // namespace relaylab::sim
