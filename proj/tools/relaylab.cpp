// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

// relaylab run | elect | tally | auction | check | trace
//
// Exit status: 2 for unusable input or flags, 1 when a run or suite reports an
// invariant violation, 0 otherwise.

#include "suites.hpp"

#include <relaylab/io.hpp>
#include <relaylab/sim.hpp>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace relaylab;

namespace {

constexpr int ok = 0;
constexpr int violated = 1;
constexpr int unusable = 2;

struct Options {
    std::string input;
    std::string out;
    std::string format = "json";
    std::string trace;
    std::optional<uint64_t> seed;
};

void emit(const Options& o, const std::string& text)
{
    if (o.out.empty()) {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f || !(f << text))
        throw Error(ErrorKind::config, "cannot write " + o.out);
    spdlog::info("wrote {}", o.out);
}

sim::ScenarioConfig scenario(const Options& o)
{
    auto c = sim::ScenarioConfig::from_json(io::read_file(o.input));
    if (o.seed)
        c.seed = *o.seed;
    return c;
}

int verdict(const sim::MetricsReport& r)
{
    for (const auto& [name, hit] : r.violations)
        if (hit)
            spdlog::warn("violation: {}", name);
    return r.any_violation() ? violated : ok;
}

int cmd_run(const Options& o)
{
    auto c = scenario(o);
    std::ofstream trace_file;
    sim::TraceSink sink;
    if (!o.trace.empty()) {
        trace_file.open(o.trace, std::ios::binary);
        if (!trace_file)
            throw Error(ErrorKind::config, "cannot write " + o.trace);
        sink = [&](const std::string& line) { trace_file << line << '\n'; };
    }
    spdlog::info("{}: seed {}, {} validators, {} slots", c.name, c.seed, c.validators, c.slots);
    auto r = sim::run(c, sink);
    spdlog::info("best #{}, finalized #{}, trace {}", r.best_height, r.finalized_height, r.trace_hash);
    emit(o, o.format == "csv" ? r.to_csv() : r.to_json());
    return verdict(r);
}

int cmd_trace(const Options& o)
{
    auto c = scenario(o);
    std::ostringstream lines;
    auto r = sim::run(c, [&](const std::string& line) { lines << line << '\n'; });
    emit(o, lines.str());
    spdlog::info("trace hash {}", r.trace_hash);
    return verdict(r);
}

int cmd_elect(const Options& o)
{
    auto in = io::election_from_json(io::read_file(o.input));
    auto r = npos::elect(in);
    std::optional<bool> pjr;
    try {
        pjr = npos::check_pjr(in, r.committee);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::cap_exceeded)
            throw;
        spdlog::info("PJR not checked: {}", e.what());
    }
    emit(o, o.format == "csv" ? io::result_to_csv(r) : io::result_to_json(r, pjr));
    if (pjr == false) {
        spdlog::warn("violation: committee fails PJR");
        return violated;
    }
    return ok;
}

int cmd_tally(const Options& o)
{
    auto ref = io::referendum_from_json(io::read_file(o.input));
    bool approved = gov::tally(ref.ballots, ref.electorate, ref.bias);
    emit(o, o.format == "csv" ? io::verdict_to_csv(ref, approved) : io::verdict_to_json(ref, approved));
    return ok;
}

int cmd_auction(const Options& o)
{
    auto outcome = io::run_auction(io::auction_from_json(io::read_file(o.input)));
    emit(o, o.format == "csv" ? io::outcome_to_csv(outcome) : io::outcome_to_json(outcome));
    return ok;
}

int cmd_check(const Options& o, bool formatted)
{
    std::vector<const suites::Suite*> chosen;
    if (o.input == "all") {
        for (const auto& s : suites::all())
            chosen.push_back(&s);
    } else if (const auto* s = suites::find(o.input)) {
        chosen.push_back(s);
    } else {
        std::string names;
        for (const auto& s : suites::all())
            names += " " + s.name;
        throw Error(ErrorKind::config, "unknown suite '" + o.input + "'; known: all" + names);
    }
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    std::ostringstream text;
    std::ostringstream csv;
    csv << "number,name,passed,detail\n";
    bool all_passed = true;
    for (const auto* s : chosen) {
        spdlog::info("suite {}", s->name);
        auto r = suites::execute(*s);
        all_passed = all_passed && r.passed;
        rows.push_back({{"number", s->number}, {"name", s->name}, {"claim", s->claim}, {"passed", r.passed},
                        {"detail", r.detail}});
        std::string detail = r.detail;
        for (auto& ch : detail)
            if (ch == '"')
                ch = '\'';
        csv << s->number << "," << s->name << "," << (r.passed ? "true" : "false") << ",\"" << detail << "\"\n";
        text << suites::format(*s, r) << "\n";
        if (!formatted && o.out.empty())
            std::cout << suites::format(*s, r) << std::endl; // stream as suites finish
    }
    if (formatted)
        emit(o, o.format == "csv" ? csv.str() : rows.dump(2) + "\n");
    else if (!o.out.empty())
        emit(o, text.str());
    return all_passed ? ok : violated;
}

} // namespace

int main(int argc, char** argv)
{
    if (!suites::configure_logging()) {
        std::cerr << "SIM_LOG must be one of trace, debug, info, warn, error, off\n";
        return unusable;
    }
    CLI::App app{"relaylab: deterministic relay-chain protocol laboratory"};
    app.require_subcommand(1);
    Options o;

    auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "write output to this file instead of stdout"); };
    auto add_format = [&](CLI::App* c) {
        return c->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "csv"}));
    };
    auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "override the scenario seed"); };

    auto* run = app.add_subcommand("run", "simulate a scenario and write its metrics report");
    run->add_option("scenario", o.input, "scenario JSON")->required();
    add_seed(run);
    add_out(run);
    add_format(run);
    run->add_option("--trace", o.trace, "also write the event trace (JSON lines) to this file");

    auto* trace = app.add_subcommand("trace", "simulate a scenario and write its event trace");
    trace->add_option("scenario", o.input, "scenario JSON")->required();
    add_seed(trace);
    add_out(trace);

    auto* elect = app.add_subcommand("elect", "elect a committee from an election instance");
    elect->add_option("instance", o.input, "election instance JSON")->required();
    add_out(elect);
    add_format(elect);

    auto* tally = app.add_subcommand("tally", "tally a referendum");
    tally->add_option("referendum", o.input, "referendum JSON")->required();
    add_out(tally);
    add_format(tally);

    auto* auction = app.add_subcommand("auction", "close a candle auction and report the winners");
    auction->add_option("auction", o.input, "auction JSON")->required();
    add_out(auction);
    add_format(auction);

    auto* check = app.add_subcommand("check", "run an acceptance suite by name or number, or all");
    check->add_option("suite", o.input, "suite name, number or 'all'")->required();
    add_out(check);
    auto* check_format = add_format(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : unusable;
    }

    try {
        if (run->parsed())
            return cmd_run(o);
        if (trace->parsed())
            return cmd_trace(o);
        if (elect->parsed())
            return cmd_elect(o);
        if (tally->parsed())
            return cmd_tally(o);
        if (auction->parsed())
            return cmd_auction(o);
        return cmd_check(o, check_format->count() > 0);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return unusable;
    }
}
