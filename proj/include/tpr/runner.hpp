#pragma once
// Story-file driver shared by the command-line tool and the tests: compiles
// a parsed story, builds the symbol space, runs the selected engine, prints
// per-query answers and optionally cross-checks every answer set against
// the brute-force oracle.

#include <cstdint>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpr/inference.hpp"
#include "tpr/lf.hpp"
#include "tpr/oracle.hpp"
#include "tpr/query.hpp"
#include "tpr/runner_simplified.hpp"
#include "tpr/simplified.hpp"

namespace tpr {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    enum class Mode { full, simplified, pathfind, oracle };
    enum class Format { text, jsonl };

    std::size_t dim = 32;
    std::uint64_t seed = 0;
    Mode mode = Mode::full;
    Tensor::Repr repr = Tensor::Repr::factored;
    double threshold = 0.5;
    std::size_t max_path_len = 2;
    Format format = Format::text;
    bool check_oracle = false;
    std::size_t jobs = 1;
    AxiomConfig axioms;
};

// exit codes
inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitConfig = 3;

struct CompiledStory {
    struct TimedFact {
        std::size_t time;
        Proposition prop;
    };
    struct CompiledQuery {
        Query query;
        bool is_path = false;
        std::string path_from, path_to;
        std::size_t line = 0;
    };
    // facts and queries interleaved in file order
    struct Entry {
        std::optional<TimedFact> fact;
        std::optional<CompiledQuery> query;
    };
    std::vector<Entry> entries;
    std::vector<DirectionFact> direction_facts;  // pathfind mode
    std::vector<std::string> symbols;            // registration order
    std::size_t num_times = 0;
};

namespace rundetail {

inline bool is_direction_pred(const std::string& p) {
    Direction d;
    return parse_direction(p, d);
}

inline void note_symbol(std::vector<std::string>& order, std::set<std::string>& seen,
                        const std::string& name) {
    if (seen.insert(name).second) order.push_back(name);
}

}  // namespace rundetail

/// Resolves implicit timesteps, pads third arguments, and collects the
/// symbols that the space must contain.
inline CompiledStory compile_story(const StoryFile& sf, RunConfig::Mode mode) {
    CompiledStory out;
    std::set<std::string> seen;
    std::size_t max_time = 0;
    auto note = [&](const std::string& s) { rundetail::note_symbol(out.symbols, seen, s); };

    for (const auto& entry : sf.entries) {
        if (const auto* f = std::get_if<FactLine>(&entry)) {
            if (mode == RunConfig::Mode::pathfind) {
                Direction d;
                if (!parse_direction(f->pred, d))
                    throw config_error("path-finding facts use predicates n, s, e, w (line " +
                                       std::to_string(f->line) + ")");
                if (f->args.size() != 2 || f->negated)
                    throw config_error("direction facts are positive and binary (line " +
                                       std::to_string(f->line) + ")");
                out.direction_facts.push_back({d, f->args[0], f->args[1]});
                continue;
            }
            std::size_t t = f->time_override ? *f->time_override : max_time + 1;
            if (t < max_time && !f->time_override)
                t = max_time + 1;
            if (t < max_time)
                throw config_error("timestep override goes backwards (line " +
                                   std::to_string(f->line) + ")");
            max_time = std::max(max_time, t);
            Proposition p;
            p.pred = f->pred;
            p.sign = f->negated ? -1 : +1;
            p.args[0] = f->args[0];
            p.args[1] = f->args[1];
            if (f->args.size() == 3)
                p.args[2] = f->args[2];
            else
                p.args[2] = f->pred == "<" ? kDummySymbol : time_symbol(t);
            note(p.pred);
            for (const auto& a : p.args)
                if (time_index(a) == 0) note(a);
            for (const auto& a : p.args) max_time = std::max(max_time, time_index(a));
            out.entries.push_back({CompiledStory::TimedFact{t, std::move(p)}, std::nullopt});
        } else {
            const auto& q = std::get<QueryLine>(entry);
            CompiledStory::CompiledQuery cq;
            cq.line = q.line;
            cq.query = q.query;
            if (q.query.atoms.size() == 1 && q.query.atoms[0].pred == "path") {
                const auto& atom = q.query.atoms[0];
                if (atom.args.size() != 2 || atom.args[0].kind != QueryTerm::Kind::constant ||
                    atom.args[1].kind != QueryTerm::Kind::constant)
                    throw config_error("path queries take two location constants (line " +
                                       std::to_string(q.line) + ")");
                cq.is_path = true;
                cq.path_from = atom.args[0].name;
                cq.path_to = atom.args[1].name;
                out.entries.push_back({std::nullopt, std::move(cq)});
                continue;
            }
            for (const auto& atom : q.query.atoms) {
                if (atom.pred != kNextPred) note(atom.pred);
                for (const auto& term : atom.args)
                    if (term.kind == QueryTerm::Kind::constant && time_index(term.name) == 0)
                        note(term.name);
                for (const auto& term : atom.args)
                    if (term.kind == QueryTerm::Kind::constant)
                        max_time = std::max(max_time, time_index(term.name));
            }
            for (const auto& [var, syms] : q.query.exclusions)
                for (const auto& s : syms)
                    if (time_index(s) == 0) note(s);
            out.entries.push_back({std::nullopt, std::move(cq)});
        }
    }
    if (mode != RunConfig::Mode::pathfind) {
        note(kDummySymbol);
        out.num_times = max_time;
        for (std::size_t i = 1; i <= max_time; ++i) note(time_symbol(i));
        if (max_time >= 2) note("<");
    }
    return out;
}

struct QueryReport {
    std::size_t query_index = 0;
    std::vector<std::string> variables;
    std::vector<Answers::Binding> answers;          // symbol queries
    std::vector<Path> paths;                        // path queries
    bool is_path = false;
    double truth = 0.0;                             // ground queries
    bool is_ground = false;
    std::optional<bool> oracle_match;
};

struct RunResult {
    int exit_code = kExitOk;
    std::vector<QueryReport> reports;
    std::string error;  // non-empty on parse/config failure
    bool fixpoint_reached = true;
};

namespace rundetail {

inline std::set<std::vector<std::string>> binding_set(const QueryReport& r) {
    std::set<std::vector<std::string>> out;
    if (r.is_ground) {
        if (r.truth > 0.5) out.insert({});
        return out;
    }
    for (const auto& b : r.answers) out.insert(b.symbols);
    return out;
}

inline void format_report(const QueryReport& r, RunConfig::Format fmt, std::ostream& os) {
    if (fmt == RunConfig::Format::jsonl) {
        nlohmann::ordered_json j;
        j["query_index"] = r.query_index;
        j["variables"] = r.variables;
        nlohmann::ordered_json answers = nlohmann::ordered_json::array();
        if (r.is_path) {
            for (const auto& p : r.paths) {
                nlohmann::ordered_json b = nlohmann::ordered_json::array();
                nlohmann::ordered_json steps = nlohmann::ordered_json::array();
                for (Direction d : p) steps.push_back(std::string(1, direction_char(d)));
                b.push_back(steps);
                answers.push_back({{"binding", b}, {"score", 1.0}});
            }
        } else if (r.is_ground) {
            if (r.truth > 0.5)
                answers.push_back({{"binding", nlohmann::ordered_json::array()},
                                   {"score", r.truth}});
        } else {
            for (const auto& b : r.answers)
                answers.push_back({{"binding", b.symbols}, {"score", b.score}});
        }
        j["answers"] = answers;
        if (r.oracle_match) j["oracle_match"] = *r.oracle_match;
        os << j.dump() << "\n";
        return;
    }
    os << "query " << r.query_index << ": ";
    if (r.is_path) {
        if (r.paths.empty()) {
            os << "no path";
        } else {
            for (std::size_t i = 0; i < r.paths.size(); ++i) {
                if (i) os << " | ";
                os << "P = " << path_to_string(r.paths[i]);
            }
        }
    } else if (r.is_ground) {
        os << "truth = " << (r.truth > 0.5 ? "1" : "0") << " (score " << r.truth << ")";
    } else if (r.answers.empty()) {
        os << "no answer";
    } else {
        for (std::size_t i = 0; i < r.answers.size(); ++i) {
            if (i) os << " | ";
            for (std::size_t v = 0; v < r.variables.size(); ++v) {
                if (v) os << ", ";
                os << r.variables[v] << " = " << r.answers[i].symbols[v];
            }
            os << " (score " << r.answers[i].score << ")";
        }
    }
    if (r.oracle_match) os << (r.oracle_match.value() ? "  [oracle: MATCH]" : "  [oracle: MISMATCH]");
    os << "\n";
}

}  // namespace rundetail

/// Runs a compiled story through the selected engine. Facts are applied in
/// file order; each query is answered against the state at its position.
inline RunResult run_compiled(const RunConfig& cfg, const CompiledStory& story,
                              std::ostream& os) {
    RunResult result;

    if (cfg.mode == RunConfig::Mode::pathfind) {
        PathModel model = PathModel::build(story.direction_facts, cfg.dim, cfg.seed);
        auto closure = cfg.check_oracle
                           ? oracle::path_closure(story.direction_facts, cfg.max_path_len)
                           : decltype(oracle::path_closure({}, 0)){};
        std::size_t qi = 0;
        for (const auto& entry : story.entries) {
            if (!entry.query) continue;
            const auto& cq = *entry.query;
            QueryReport r;
            r.query_index = ++qi;
            r.is_path = true;
            r.variables = cq.query.query_vars;
            if (!model.has_location(cq.path_from) || !model.has_location(cq.path_to))
                throw config_error("path query mentions an unplaced location (line " +
                                   std::to_string(cq.line) + ")");
            r.paths = model.find_paths(cq.path_from, cq.path_to, cfg.max_path_len);
            if (cfg.check_oracle) {
                auto it = closure.find({cq.path_from, cq.path_to});
                std::set<Path> expect =
                    it == closure.end() ? std::set<Path>{}
                                        : std::set<Path>(it->second.begin(), it->second.end());
                std::set<Path> got(r.paths.begin(), r.paths.end());
                if (cq.path_from == cq.path_to) got.erase(Path{});  // axioms have no empty path
                r.oracle_match = got == expect;
                if (!*r.oracle_match) result.exit_code = kExitMismatch;
            }
            rundetail::format_report(r, cfg.format, os);
            result.reports.push_back(std::move(r));
        }
        return result;
    }

    // symbol space shared by all remaining modes
    if (story.symbols.size() > cfg.dim)
        throw config_error("dimension " + std::to_string(cfg.dim) + " is too small for " +
                           std::to_string(story.symbols.size()) +
                           " symbols; raise --dim");
    auto space = std::make_shared<const SymbolSpace>(SymbolSpace::build(
        story.symbols, cfg.dim, SymbolSpace::Encoding::orthonormal, cfg.seed));

    Story prefix(story.num_times);
    std::size_t flushed = 0;  // timesteps already handed to the engine

    std::optional<StoryEngine> engine;
    if (cfg.mode == RunConfig::Mode::full)
        engine.emplace(space, story.num_times, cfg.axioms, cfg.repr);
    SimplifiedEngine simplified(space, story.num_times, cfg.axioms);

    auto flush_to = [&](std::size_t t) {
        for (std::size_t i = flushed + 1; i <= t; ++i) {
            if (engine) engine->step(i, prefix[i - 1]);
            if (cfg.mode == RunConfig::Mode::simplified) simplified.step(i, prefix[i - 1]);
        }
        flushed = std::max(flushed, t);
    };

    std::size_t qi = 0;
    std::size_t pending_max = 0;
    for (const auto& entry : story.entries) {
        if (entry.fact) {
            const auto& tf = *entry.fact;
            if (tf.time <= flushed)
                throw config_error("fact arrives for an already-answered timestep t" +
                                   std::to_string(tf.time));
            prefix[tf.time - 1].push_back(tf.prop);
            pending_max = std::max(pending_max, tf.time);
            continue;
        }
        flush_to(pending_max);
        const auto& cq = *entry.query;
        QueryReport r;
        r.query_index = ++qi;
        r.variables = cq.query.query_vars;
        r.is_ground = cq.query.query_vars.empty();

        std::set<std::vector<std::string>> engine_set;
        if (cfg.mode == RunConfig::Mode::full) {
            Answers ans = evaluate(engine->kb(), cq.query, {}, cfg.threshold);
            if (r.is_ground)
                r.truth = ans.tensor.densify().value();
            else
                r.answers = ans.bindings;
        } else if (cfg.mode == RunConfig::Mode::simplified) {
            auto ans = simplified.evaluate(cq.query, cfg.threshold);
            if (r.is_ground)
                r.truth = ans.truth;
            else
                r.answers = ans.bindings;
        } else {  // oracle mode
            Story sub(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(flushed));
            oracle::Axioms ax;
            ax.config = cfg.axioms;
            auto kb = oracle::run_story(sub, space->names(), ax);
            auto bindings = oracle::answer(kb, cq.query);
            if (r.is_ground) {
                r.truth = bindings.empty() ? 0.0 : 1.0;
            } else {
                for (const auto& tuple : bindings) r.answers.push_back({tuple, 1.0});
            }
        }

        if (cfg.check_oracle && cfg.mode != RunConfig::Mode::oracle) {
            Story sub(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(flushed));
            oracle::Axioms ax;
            ax.config = cfg.axioms;
            auto kb = oracle::run_story(sub, space->names(), ax);
            auto expect = oracle::answer(kb, cq.query);
            r.oracle_match = rundetail::binding_set(r) == expect;
            if (!*r.oracle_match) result.exit_code = kExitMismatch;
        }
        rundetail::format_report(r, cfg.format, os);
        result.reports.push_back(std::move(r));
    }
    flush_to(pending_max);
    if (engine && !engine->fixpoint_reached()) {
        result.fixpoint_reached = false;
        os << "warning: transitive closure hit the iteration cap\n";
    }
    return result;
}

inline RunResult run_text(const RunConfig& cfg, const std::string& text, std::ostream& os) {
    try {
        StoryFile sf = parse_story(text);
        CompiledStory story = compile_story(sf, cfg.mode);
        return run_compiled(cfg, story, os);
    } catch (const parse_error& e) {
        RunResult r;
        r.exit_code = kExitParse;
        r.error = e.what();
        return r;
    } catch (const query_error& e) {
        RunResult r;
        r.exit_code = kExitParse;
        r.error = e.what();
        return r;
    } catch (const config_error& e) {
        RunResult r;
        r.exit_code = kExitConfig;
        r.error = e.what();
        return r;
    } catch (const symbol_error& e) {
        RunResult r;
        r.exit_code = kExitConfig;
        r.error = e.what();
        return r;
    } catch (const model_error& e) {
        RunResult r;
        r.exit_code = kExitConfig;
        r.error = e.what();
        return r;
    }
}

inline RunResult run_file(const RunConfig& cfg, const std::string& path, std::ostream& os) {
    std::ifstream in(path);
    if (!in) {
        RunResult r;
        r.exit_code = kExitParse;
        r.error = "cannot read story file: " + path;
        return r;
    }
    std::ostringstream text;
    text << in.rdbuf();
    return run_text(cfg, text.str(), os);
}

/// Processes story files, possibly concurrently (stories share nothing);
/// outputs stay in argument order. Returns the worst exit code.
inline int run_files(const RunConfig& cfg, const std::vector<std::string>& paths,
                     std::ostream& os, std::ostream& err) {
    std::vector<std::future<std::pair<RunResult, std::string>>> futures;
    std::size_t jobs = std::max<std::size_t>(1, cfg.jobs);
    auto worker = [&cfg](std::string path) {
        std::ostringstream buf;
        RunResult r = run_file(cfg, path, buf);
        return std::make_pair(std::move(r), buf.str());
    };
    int worst = kExitOk;
    if (jobs == 1) {
        for (const auto& p : paths) {
            auto [r, text] = worker(p);
            os << text;
            if (!r.error.empty()) err << p << ": " << r.error << "\n";
            worst = std::max(worst, r.exit_code);
        }
        return worst;
    }
    for (const auto& p : paths)
        futures.push_back(std::async(std::launch::async, worker, p));
    for (std::size_t i = 0; i < paths.size(); ++i) {
        auto [r, text] = futures[i].get();
        os << text;
        if (!r.error.empty()) err << paths[i] << ": " << r.error << "\n";
        worst = std::max(worst, r.exit_code);
    }
    return worst;
}

}  // namespace tpr
