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

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mmcep/engine.hpp"
#include "mmcep/error.hpp"
#include "mmcep/frames.hpp"
#include "mmcep/query.hpp"
#include "mmcep/scenario.hpp"
#include "mmcep/schema_io.hpp"
#include "mmcep/text.hpp"

namespace mmcep::config {

struct PublisherSource {
    std::string id;
    std::string source;  // frame file path or "synthetic:<kind> k=v ..."
    std::vector<rules::ParkingSlot> slots;
    rules::RegionMap regions;
    std::optional<double> parking_threshold;
};

/// Engine configuration file:
///
///   key = value            top-level settings, before any section
///   [publishers]  P = <path> | synthetic:<kind> k=v ...
///   [slots]       P <slot> = x y w h
///   [regions]     P <name> = x y w h
///   [queries]     one query per line
///
/// Top-level keys: schema, notifications, state_backend, window_default,
/// enrichment, overtake_axis, overtake_max_gap, iou_threshold,
/// track_association, retention.
struct EngineConfig {
    std::string schema = "builtin:traffic";
    std::string notifications = "stdout";
    std::optional<std::string> state_backend;
    query::WindowSpec window_default = query::CountWindow{};
    engine::EngineOptions options;
    std::vector<PublisherSource> publishers;
    std::vector<query::Query> queries;
    std::filesystem::path base_dir;

    /// Paths in the file are relative to the file's directory.
    std::string resolve(const std::string& path) const {
        const std::filesystem::path p(path);
        return p.is_absolute() || base_dir.empty() ? path : (base_dir / p).string();
    }

    PublisherSource* find_publisher(std::string_view id) {
        for (auto& p : publishers)
            if (p.id == id) return &p;
        return nullptr;
    }
};

namespace detail {

inline spatial::Rect parse_rect(text::Lexer& lx) {
    spatial::Rect r;
    r.x = lx.number("x");
    r.y = lx.number("y");
    r.w = lx.number("width");
    r.h = lx.number("height");
    lx.expect_end();
    if (!r.has_area()) lx.error("rectangle must have positive width and height");
    return r;
}

inline bool parse_switch(text::Lexer& lx) {
    const std::string v = lx.word("on or off");
    if (text::iequals(v, "on") || text::iequals(v, "true") || v == "1") return true;
    if (text::iequals(v, "off") || text::iequals(v, "false") || v == "0") return false;
    lx.error("expected on or off");
}

}  // namespace detail

inline EngineConfig parse_engine_config(std::string_view source, std::filesystem::path base_dir = {}) {
    EngineConfig cfg;
    cfg.base_dir = std::move(base_dir);
    std::string section;
    struct PendingQuery {
        std::string text;
        std::size_t line;
        std::size_t column;
    };
    std::vector<PendingQuery> pending;
    const auto lines = text::split_lines(source);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const std::string_view raw = text::strip_comment(lines[i]);
        const std::string_view body = text::trim(raw);
        if (body.empty()) continue;
        const std::size_t col = static_cast<std::size_t>(body.data() - lines[i].data());
        if (body.front() == '[') {
            if (body.back() != ']') throw ParseError(ErrorCode::ParseError, line_no, col + 1, "unterminated section header");
            section = std::string(text::trim(body.substr(1, body.size() - 2)));
            if (section != "publishers" && section != "slots" && section != "regions" && section != "queries")
                throw ParseError(ErrorCode::ParseError, line_no, col + 1, "unknown section [" + section + "]");
            continue;
        }
        if (section == "queries") {
            pending.push_back({std::string(body), line_no, col});
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError(ErrorCode::ParseError, line_no, col + 1, "expected key = value");
        const std::string_view key = text::trim(body.substr(0, eq));
        const std::string_view value = text::trim(body.substr(eq + 1));
        const std::size_t value_col = col + static_cast<std::size_t>(value.data() - body.data());
        if (section == "publishers") {
            if (key.empty() || value.empty()) throw ParseError(ErrorCode::ParseError, line_no, col + 1, "expected P = source");
            if (cfg.find_publisher(key)) throw ParseError(ErrorCode::ValidationError, line_no, col + 1, "publisher '" + std::string(key) + "' listed twice");
            cfg.publishers.push_back({std::string(key), std::string(value), {}, {}, {}});
            continue;
        }
        if (section.empty() && (key == "schema" || key == "notifications" || key == "state_backend")) {
            if (value.empty()) throw ParseError(ErrorCode::ParseError, line_no, col + 1, "missing value for '" + std::string(key) + "'");
            if (key == "schema") cfg.schema = std::string(value);
            else if (key == "notifications") cfg.notifications = std::string(value);
            else if (text::iequals(value, "off")) cfg.state_backend.reset();
            else cfg.state_backend = std::string(value);
            continue;
        }
        text::Lexer lx(value, line_no, value_col);
        if (section.empty()) {
            if (key == "window_default") {
                cfg.window_default = query::parse_window(lx);
                lx.expect_end();
                try {
                    query::validate(cfg.window_default);
                } catch (const Error& e) {
                    throw ParseError(ErrorCode::ValidationError, line_no, value_col + 1, e.message());
                }
            } else if (key == "enrichment") {
                const std::string v = lx.word("hierarchy or exact");
                if (text::iequals(v, "hierarchy")) cfg.options.enrichment = graph::Enrichment::Hierarchy;
                else if (text::iequals(v, "exact")) cfg.options.enrichment = graph::Enrichment::ExactClass;
                else lx.error("expected hierarchy or exact");
                lx.expect_end();
            } else if (key == "overtake_axis") {
                const double fx = lx.number("axis x");
                const double fy = lx.number("axis y");
                lx.expect_end();
                try {
                    cfg.options.overtake_axis = spatial::Axis(fx, fy);
                } catch (const Error& e) {
                    throw ParseError(ErrorCode::ValidationError, line_no, value_col + 1, e.message());
                }
            } else if (key == "overtake_max_gap") {
                const auto g = lx.integer("gap");
                if (g < 0) lx.error("gap must be >= 0");
                cfg.options.overtake_max_gap = static_cast<int>(g);
                lx.expect_end();
            } else if (key == "iou_threshold") {
                const double t = lx.number("threshold");
                if (!(t > 0.0 && t < 1.0)) lx.error("threshold must lie in (0, 1)");
                cfg.options.iou_threshold = t;
                lx.expect_end();
            } else if (key == "track_association") {
                cfg.options.track_association = detail::parse_switch(lx);
                lx.expect_end();
            } else if (key == "retention") {
                const auto r = lx.integer("retention");
                if (r < 1) lx.error("retention must be >= 1");
                cfg.options.retention = static_cast<std::size_t>(r);
                lx.expect_end();
            } else {
                throw ParseError(ErrorCode::ParseError, line_no, col + 1, "unknown setting '" + std::string(key) + "'");
            }
        } else {
            text::Lexer kl(key, line_no, col);
            const std::string pub = kl.word("publisher id");
            const std::string name = kl.word(section == "slots" ? "slot id" : "region name");
            kl.expect_end();
            PublisherSource* p = cfg.find_publisher(pub);
            if (!p) throw ParseError(ErrorCode::ValidationError, line_no, col + 1, "unknown publisher '" + pub + "'");
            const spatial::Rect r = detail::parse_rect(lx);
            if (section == "slots") p->slots.push_back({name, r});
            else p->regions[name] = r;
        }
    }
    for (const auto& q : pending) cfg.queries.push_back(query::parse_query(q.text, cfg.window_default, q.line, q.column));
    return cfg;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline EngineConfig load_engine_config(const std::string& path) {
    return parse_engine_config(read_file(path), std::filesystem::path(path).parent_path());
}

inline schema_io::SchemaBundle load_schema(const EngineConfig& cfg) {
    if (cfg.schema == "builtin:traffic") return schema_io::traffic_schema();
    return schema_io::load_schema_file(cfg.resolve(cfg.schema));
}

struct LoadedPublisher {
    engine::PublisherConfig config;
    std::vector<frames::FrameRecord> frames;
};

/// Reads or generates a publisher's frames. Synthetic sources contribute
/// their scenario's parking slots and threshold unless the config sets them.
inline LoadedPublisher load_publisher(const EngineConfig& cfg, const PublisherSource& src) {
    LoadedPublisher out;
    out.config.id = src.id;
    out.config.slots = src.slots;
    out.config.regions = src.regions;
    if (src.source.rfind("synthetic:", 0) == 0) {
        auto scenario = scenario::generate_scenario(scenario::parse_descriptor(src.source, src.id));
        out.frames = std::move(scenario.frames);
        if (out.config.slots.empty()) out.config.slots = scenario.slots;
        out.config.parking_threshold = scenario.parking_threshold;
    } else {
        out.frames = frames::parse_frames(cfg.resolve(src.source));
    }
    if (src.parking_threshold) out.config.parking_threshold = *src.parking_threshold;
    return out;
}

}  // namespace mmcep::config
