/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

// mmcep: generate synthetic streams, run the engine, benchmark and score.
//
// Exit codes: 0 success, 1 validation failure, 2 runtime error.
// Reports go to stdout as JSON lines; the human summary goes to stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mmcep.hpp"

namespace {

using namespace mmcep;

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct GenArgs {
    std::string kind;
    std::uint64_t seed = 0;
    int frames = 0;
    int fps = 30;
    std::string stream = "P1";
    std::string out;
    std::string gt;
    std::vector<std::string> params;
};

int cmd_gen(const GenArgs& a) {
    std::string descriptor = "synthetic:" + a.kind;
    for (const auto& p : a.params) descriptor += " " + p;
    auto spec = scenario::parse_descriptor(descriptor, a.stream);
    spec.seed = a.seed;
    spec.frames = a.frames;
    spec.fps = a.fps;
    const auto sc = scenario::generate_scenario(spec);
    auto out = open_out(a.out);
    frames::write_frames(out, sc.frames);
    if (!a.gt.empty()) open_out(a.gt) << scenario::encode_truth(sc.truth);
    std::cerr << "generated " << sc.frames.size() << " frames (" << scenario::to_string(spec.kind) << ", seed "
              << spec.seed << "), " << sc.truth.events.size() << " ground-truth events\n";
    return kOk;
}

int cmd_run(const std::string& config_path, const std::string& notifications, const std::string& state_log) {
    auto cfg = config::load_engine_config(config_path);
    auto from_cwd = [](const std::string& p) {
        return p == "stdout" ? p : std::filesystem::absolute(p).string();
    };
    if (!notifications.empty()) cfg.notifications = from_cwd(notifications);
    if (!state_log.empty()) cfg.state_backend = from_cwd(state_log);
    std::ofstream file;
    std::ostream* sink = &std::cout;
    if (cfg.notifications != "stdout") {
        file = open_out(cfg.resolve(cfg.notifications));
        sink = &file;
    }
    std::ofstream backend;
    if (cfg.state_backend) backend = open_out(cfg.resolve(*cfg.state_backend));
    const auto s = runner::run_config(cfg, sink, cfg.state_backend ? &backend : nullptr);
    for (const auto& r : s.rejections) std::cerr << "rejected " << r << '\n';
    std::cerr << "frames accepted " << s.frames_accepted << ", rejected " << s.frames_rejected << "; states "
              << s.states << "; notifications " << s.notifications << '\n';
    return kOk;
}

int cmd_bench_latency(const std::string& config_path, int repeat) {
    const auto cfg = config::load_engine_config(config_path);
    const auto series = runner::measure_latency(cfg, repeat);
    for (const auto& [id, values] : series) {
        const auto s = metrics::summarize(values);
        nlohmann::ordered_json j;
        j["query_id"] = id;
        j["states"] = s.count;
        j["mean_us"] = s.mean;
        j["median_us"] = s.median;
        j["p99_us"] = s.p99;
        j["min_us"] = s.min;
        j["max_us"] = s.max;
        std::cout << j.dump() << '\n';
        std::cerr << id << ": " << s.count << " states, median " << s.median << " us, p99 " << s.p99 << " us\n";
    }
    return kOk;
}

int cmd_bench_throughput(const std::string& streams, const std::string& config_path, int frames) {
    runner::ThroughputSpec spec;
    if (!config_path.empty()) {
        const auto cfg = config::load_engine_config(config_path);
        spec.schema = config::load_schema(cfg);
        spec.options = cfg.options;
        for (const auto& p : cfg.publishers)
            if (p.source.rfind("synthetic:", 0) == 0) {
                spec.descriptor = p.source;
                break;
            }
        if (!cfg.queries.empty()) spec.query = cfg.queries.front();
    }
    if (frames > 0) spec.descriptor += " frames=" + std::to_string(frames);
    for (const auto& k : split_list(streams)) {
        const int n = std::stoi(k);
        const auto p = runner::measure_throughput(spec, n);
        nlohmann::ordered_json j;
        j["streams"] = p.streams;
        j["frames"] = p.frames;
        j["seconds"] = p.seconds;
        j["frames_per_second"] = p.frames_per_second;
        std::cout << j.dump() << '\n';
        std::cerr << "k=" << p.streams << ": " << static_cast<long long>(p.frames_per_second) << " frames/s\n";
    }
    return kOk;
}

int cmd_score(const std::string& notifications, const std::string& gt, int window, const std::string& query,
              const std::string& classes) {
    const auto predictions = metrics::read_predictions(
        config::read_file(notifications), query.empty() ? std::nullopt : std::optional<std::string>(query));
    const auto truth = scenario::decode_truth(config::read_file(gt));
    std::optional<std::set<std::string>> filter;
    if (!classes.empty()) {
        const auto list = split_list(classes);
        filter = std::set<std::string>(list.begin(), list.end());
    }
    const auto report = metrics::compute_f1(predictions, truth, window, filter);
    for (std::size_t s = 0; s < report.state_f1.size(); ++s) {
        const auto first = s * static_cast<std::size_t>(window);
        nlohmann::ordered_json j;
        j["state"] = s;
        j["frame_start"] = truth.frames[first].frame_no;
        j["frame_end"] = truth.frames[first + static_cast<std::size_t>(window) - 1].frame_no;
        j["f1"] = report.state_f1[s];
        std::cout << j.dump() << '\n';
    }
    const auto sum = metrics::summarize(report.state_f1);
    std::cerr << report.state_f1.size() << " states, mean F1 " << sum.mean << " (min " << sum.min << ", max "
              << sum.max << ")\n";
    return kOk;
}

int cmd_validate(const std::string& path, const std::string& schema_path) {
    const auto records = frames::parse_frames(path);
    const auto bundle = schema_path.empty() || schema_path == "builtin:traffic" ? schema_io::traffic_schema()
                                                                                 : schema_io::load_schema_file(schema_path);
    for (std::size_t i = 0; i < records.size(); ++i) {
        try {
            for (const auto& d : records[i].detections) graph::validate_detection(d, bundle.schema);
        } catch (const Error& e) {
            throw ParseError(ErrorCode::ValidationError, i + 1, 0, e.what());
        }
    }
    nlohmann::ordered_json j;
    j["valid"] = true;
    j["records"] = records.size();
    std::cout << j.dump() << '\n';
    std::cerr << path << ": " << records.size() << " valid records\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multimedia complex event processing over object-detection streams"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate a synthetic frame file and its ground truth");
    g->add_option("--scenario", gen.kind, "overtake | follow_no_overtake | parking_enter_exit | multi_object_noise")
        ->required();
    g->add_option("--seed", gen.seed, "Random seed")->required();
    g->add_option("--frames", gen.frames, "Frame count (0 = scenario default)")->required();
    g->add_option("--out", gen.out, "Frame file to write")->required();
    g->add_option("--gt", gen.gt, "Ground-truth file to write");
    g->add_option("--fps", gen.fps, "Nominal frame rate")->check(CLI::PositiveNumber);
    g->add_option("--stream", gen.stream, "Stream id written into each record");
    g->add_option("--param", gen.params, "Scenario parameter key=value (repeatable)");

    std::string config_path, notifications, state_log;
    auto* r = app.add_subcommand("run", "Replay the publishers of an engine config");
    r->add_option("--config", config_path, "Engine config file")->required();
    r->add_option("--notifications", notifications, "Notification log path (overrides the config)");
    r->add_option("--state-log", state_log, "State backend log path (overrides the config)");

    auto* b = app.add_subcommand("bench", "Latency and throughput harness");
    b->require_subcommand(1);
    int repeat = 1;
    auto* bl = b->add_subcommand("latency", "Per-state matcher latency per query");
    bl->add_option("--config", config_path, "Engine config file")->required();
    bl->add_option("--repeat", repeat, "Number of replays")->check(CLI::PositiveNumber);
    std::string streams = "1,2,3,4";
    int bench_frames = 0;
    auto* bt = b->add_subcommand("throughput", "Frames per second against parallel stream count");
    bt->add_option("--streams", streams, "Comma-separated stream counts");
    bt->add_option("--config", config_path, "Config supplying the synthetic source and query template");
    bt->add_option("--frames", bench_frames, "Frames per stream");

    std::string gt, query, classes;
    int window = 5;
    auto* s = app.add_subcommand("score", "Per-state F1 of object notifications against ground truth");
    s->add_option("--notifications", notifications, "Notification log")->required();
    s->add_option("--gt", gt, "Ground-truth file")->required();
    s->add_option("--window", window, "Frames per state")->required()->check(CLI::PositiveNumber);
    s->add_option("--query", query, "Only score this query id");
    s->add_option("--classes", classes, "Comma-separated ground-truth classes to count");

    std::string frames_path, schema_path;
    auto* v = app.add_subcommand("validate", "Check a frame file's records and ordering");
    v->add_option("--frames", frames_path, "Frame file")->required();
    v->add_option("--schema", schema_path, "Schema file (default builtin:traffic)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kValidation;
    }

    try {
        if (g->parsed()) return cmd_gen(gen);
        if (r->parsed()) return cmd_run(config_path, notifications, state_log);
        if (bl->parsed()) return cmd_bench_latency(config_path, repeat);
        if (bt->parsed()) return cmd_bench_throughput(streams, config_path, bench_frames);
        if (s->parsed()) return cmd_score(notifications, gt, window, query, classes);
        if (v->parsed()) return cmd_validate(frames_path, schema_path);
    } catch (const Error& e) {
        std::cerr << "mmcep: " << e.what() << '\n';
        return e.code() == ErrorCode::IoError ? kRuntime : kValidation;
    } catch (const std::exception& e) {
        std::cerr << "mmcep: " << e.what() << '\n';
        return kRuntime;
    }
    return kRuntime;
}
