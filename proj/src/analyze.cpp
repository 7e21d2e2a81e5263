#include "irbench/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "irbench/errors.hpp"
#include "irbench/expand.hpp"
#include "irbench/log.hpp"

namespace irbench {

double ScoreTable::avg() const {
    if (by_dimension.empty()) return 0.0;
    double sum = 0;
    for (const auto& [d, v] : by_dimension) sum += v;
    return sum / static_cast<double>(by_dimension.size());
}

std::optional<double> ScoreTable::language_avg(const std::string& language) const {
    auto it = language_dimension.find(language);
    if (it == language_dimension.end() || it->second.empty()) return std::nullopt;
    double sum = 0;
    for (const auto& [d, v] : it->second) sum += v;
    return sum / static_cast<double>(it->second.size());
}

ScoreTable ScoreTable::from_dimension_scores(const std::map<Dimension, double>& scores) {
    ScoreTable t;
    t.by_dimension = scores;
    return t;
}

json ScoreTable::to_json() const {
    json dims;
    for (const auto& [d, v] : by_dimension) dims[std::string(dimension_code(d))] = v;
    json langs;
    for (const auto& [lang, m] : language_dimension) {
        json ld;
        for (const auto& [d, v] : m) ld[std::string(dimension_code(d))] = v;
        langs[lang] = ld;
    }
    json j{{"avg", avg()}, {"dimensions", dims}};
    if (!langs.empty()) j["languages"] = langs;
    if (!question_fraction.empty()) j["questions"] = question_fraction;
    return j;
}

ScoreTable ScoreTable::from_json(const json& j) {
    ScoreTable t;
    for (const auto& [code, v] : j.at("dimensions").items()) {
        auto d = parse_dimension(code);
        if (!d) throw Error("unknown dimension code in score table: " + code);
        t.by_dimension[*d] = v.get<double>();
    }
    if (j.contains("languages")) {
        for (const auto& [lang, dims] : j["languages"].items())
            for (const auto& [code, v] : dims.items()) {
                auto d = parse_dimension(code);
                if (!d) throw Error("unknown dimension code in score table: " + code);
                t.language_dimension[lang][*d] = v.get<double>();
            }
    }
    if (j.contains("questions"))
        for (const auto& [id, v] : j["questions"].items()) t.question_fraction[id] = v.get<double>();
    return t;
}

ScoreTable score_run(const std::filesystem::path& run_dir, const Benchmark& benchmark,
                     const ScoreOptions& opts) {
    auto manifest = load_manifest(run_dir);
    if (manifest.benchmark_hash != benchmark.meta.content_hash)
        throw ConfigError("run was produced from a different benchmark (hash mismatch)");
    InputMode mode = parse_mode(manifest.mode).value_or(InputMode::IF);
    auto verdicts = load_verdicts(run_dir);

    if (!opts.allow_partial && verdicts.size() < manifest.task_count)
        throw IncompleteRun(fmt::format("run has {}/{} verdicts; re-run or pass --allow-partial",
                                        verdicts.size(), manifest.task_count));

    // question id -> language -> shift -> correctness
    ScoreTable table;
    std::map<Dimension, std::vector<double>> dim_fractions;
    std::map<Dimension, std::map<std::string, std::vector<double>>> dim_lang_fractions;

    for (const auto& item : benchmark.items) {
        auto tasks = expand_item(item, mode, manifest.prompt_digest);
        std::map<std::string, std::vector<bool>> per_language;  // observed verdicts
        bool missing = false;
        for (const auto& t : tasks) {
            auto it = verdicts.find(t.task_id);
            if (it == verdicts.end()) {
                missing = true;
                continue;
            }
            per_language[t.language].push_back(it->second.correct);
        }
        if (missing && !opts.allow_partial)
            throw IncompleteRun("missing verdicts for item " + item.id);
        if (per_language.empty()) {
            // No verdicts at all (every task failed): excluded from scoring
            // rather than counted wrong.
            log_warn("item " + item.id + " has no verdicts; excluded from scoring");
            continue;
        }

        double fraction = 0.0;
        std::map<std::string, double> lang_fraction;
        if (opts.strict && opts.strict_all_orders) {
            std::size_t total = 0, correct = 0;
            bool all = true;
            for (const auto& [lang, flags] : per_language)
                for (bool f : flags) {
                    ++total;
                    if (f) ++correct;
                    all = all && f;
                }
            bool strict_ok = total == 8 && all;
            fraction = strict_ok ? 1.0 : 0.0;
            for (const auto& [lang, flags] : per_language)
                lang_fraction[lang] = strict_ok ? 1.0 : 0.0;
        } else if (opts.strict) {
            // Per language: 1 iff all four option orders are correct; the
            // question's value is the mean across languages.
            double sum = 0;
            std::size_t langs = 0;
            for (const auto& [lang, flags] : per_language) {
                bool all = flags.size() == 4 &&
                           std::all_of(flags.begin(), flags.end(), [](bool f) { return f; });
                lang_fraction[lang] = all ? 1.0 : 0.0;
                sum += lang_fraction[lang];
                ++langs;
            }
            fraction = langs ? sum / static_cast<double>(langs) : 0.0;
        } else {
            std::size_t total = 0, correct = 0;
            for (const auto& [lang, flags] : per_language) {
                std::size_t lang_correct = 0;
                for (bool f : flags) {
                    ++total;
                    if (f) {
                        ++correct;
                        ++lang_correct;
                    }
                }
                lang_fraction[lang] =
                    flags.empty() ? 0.0
                                  : static_cast<double>(lang_correct) / static_cast<double>(flags.size());
            }
            fraction = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
        }

        table.question_fraction[item.id] = fraction;
        dim_fractions[item.dimension].push_back(fraction);
        for (const auto& [lang, lf] : lang_fraction)
            dim_lang_fractions[item.dimension][lang].push_back(lf);
    }

    for (const auto& [dim, fracs] : dim_fractions) {
        double mean = std::accumulate(fracs.begin(), fracs.end(), 0.0) /
                      static_cast<double>(fracs.size());
        table.by_dimension[dim] = mean * 100.0;
    }
    for (Dimension d : kAllDimensions)
        if (!dim_fractions.count(d))
            log_warn(fmt::format("dimension {} has no questions; Avg covers present dimensions",
                                 dimension_code(d)));
    for (const auto& [dim, by_lang] : dim_lang_fractions)
        for (const auto& [lang, fracs] : by_lang)
            table.language_dimension[lang][dim] =
                100.0 * std::accumulate(fracs.begin(), fracs.end(), 0.0) /
                static_cast<double>(fracs.size());
    return table;
}

// --- cross-model analyses ---

std::vector<ScoreColumn> score_columns() {
    std::vector<ScoreColumn> cols{"Avg"};
    for (Dimension d : kAllDimensions) cols.emplace_back(dimension_code(d));
    return cols;
}

namespace {

std::optional<double> column_value(const ScoreTable& t, const ScoreColumn& col) {
    if (col == "Avg") return t.avg();
    auto d = parse_dimension(col);
    if (!d) return std::nullopt;
    auto it = t.by_dimension.find(*d);
    if (it == t.by_dimension.end()) return std::nullopt;
    return it->second;
}

std::optional<double> pearson_r(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::size_t n = xs.size();
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0 || syy <= 0) return std::nullopt;  // degenerate variance
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

json PearsonResult::to_json() const {
    json fams = json::array();
    for (const auto& f : families)
        fams.push_back(json{{"family", f.family}, {"members", f.members}, {"r", f.r}});
    return json{{"mean_r", mean_r}, {"families", fams}, {"skipped", skipped}};
}

PearsonResult pearson_by_family(const std::vector<std::pair<ModelSpec, ScoreTable>>& tables,
                                const PearsonOptions& opts) {
    std::map<std::string, std::vector<const std::pair<ModelSpec, ScoreTable>*>> families;
    for (const auto& entry : tables) {
        const ModelSpec& spec = entry.first;
        if (spec.closed_source || !spec.params_total) continue;
        if (!opts.include_thinking && spec.thinking) continue;
        families[spec.family].push_back(&entry);
    }

    PearsonResult result;
    std::map<ScoreColumn, std::vector<double>> per_column;
    for (const auto& [family, members] : families) {
        if (members.size() < std::max<std::size_t>(opts.min_family_size, 2)) {
            result.skipped.push_back(family + ": fewer than " +
                                     std::to_string(std::max<std::size_t>(opts.min_family_size, 2)) +
                                     " members");
            log_warn("pearson: skipping family " + family + " (too few members)");
            continue;
        }
        FamilyCorrelation fc;
        fc.family = family;
        fc.members = members.size();
        bool any = false;
        for (const auto& col : score_columns()) {
            std::vector<double> xs, ys;
            for (const auto* entry : members) {
                auto y = column_value(entry->second, col);
                if (!y) continue;
                xs.push_back(*entry->first.params_total);
                ys.push_back(*y);
            }
            if (xs.size() < 2) continue;
            auto r = pearson_r(xs, ys);
            if (!r) {
                log_warn("pearson: degenerate variance for family " + family + ", column " + col);
                continue;
            }
            fc.r[col] = *r;
            per_column[col].push_back(*r);
            any = true;
        }
        if (any) {
            result.families.push_back(std::move(fc));
        } else {
            result.skipped.push_back(family + ": degenerate variance");
            log_warn("pearson: skipping family " + family + " (degenerate variance)");
        }
    }
    if (result.families.empty())
        throw Error("pearson_by_family: no family with at least two usable members");
    for (const auto& [col, rs] : per_column)
        result.mean_r[col] =
            std::accumulate(rs.begin(), rs.end(), 0.0) / static_cast<double>(rs.size());
    return result;
}

json DeltaResult::to_json() const {
    return json{{"mean_delta", mean_delta}, {"pair_count", pair_count}};
}

DeltaResult thinking_deltas(const std::vector<std::pair<ModelSpec, ScoreTable>>& tables,
                            const std::vector<std::pair<std::string, std::string>>& pairs) {
    auto find_table = [&](const std::string& name) -> const ScoreTable& {
        for (const auto& [spec, table] : tables)
            if (spec.name == name) return table;
        throw MissingModel(name);
    };

    DeltaResult result;
    result.pair_count = pairs.size();
    std::map<ScoreColumn, std::vector<double>> deltas;
    for (const auto& [thinking_name, base_name] : pairs) {
        const ScoreTable& thinking = find_table(thinking_name);
        const ScoreTable& base = find_table(base_name);
        for (const auto& col : score_columns()) {
            auto tv = column_value(thinking, col);
            auto bv = column_value(base, col);
            if (tv && bv) deltas[col].push_back(*tv - *bv);
        }
    }
    for (const auto& [col, ds] : deltas)
        result.mean_delta[col] =
            std::accumulate(ds.begin(), ds.end(), 0.0) / static_cast<double>(ds.size());
    return result;
}

json FiveNumberSummary::to_json() const {
    return json{{"min", min}, {"q1", q1}, {"median", median},
                {"q3", q3},   {"max", max}, {"mean", mean}};
}

namespace {

// Linear interpolation over the inclusive range: quantile position p*(n-1).
double quantile_linear(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    if (sorted.size() == 1) return sorted[0];
    double pos = p * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = static_cast<std::size_t>(std::ceil(pos));
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace

std::map<Dimension, FiveNumberSummary> dimension_distribution(
    const std::vector<std::pair<ModelSpec, ScoreTable>>& tables) {
    std::map<Dimension, FiveNumberSummary> out;
    for (Dimension d : kAllDimensions) {
        std::vector<double> values;
        for (const auto& [spec, table] : tables) {
            auto it = table.by_dimension.find(d);
            if (it != table.by_dimension.end()) values.push_back(it->second);
        }
        if (values.empty()) continue;
        std::sort(values.begin(), values.end());
        FiveNumberSummary s;
        s.min = values.front();
        s.max = values.back();
        s.q1 = quantile_linear(values, 0.25);
        s.median = quantile_linear(values, 0.5);
        s.q3 = quantile_linear(values, 0.75);
        s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                 static_cast<double>(values.size());
        out[d] = s;
    }
    return out;
}

std::vector<LanguageSplit> language_split(
    const std::vector<std::pair<ModelSpec, ScoreTable>>& tables) {
    std::vector<LanguageSplit> out;
    for (const auto& [spec, table] : tables) {
        auto en = table.language_avg("en");
        auto zh = table.language_avg("zh");
        if (!en || !zh) {
            log_warn("language_split: no per-language data for " + spec.name + ", skipping");
            continue;
        }
        out.push_back(LanguageSplit{spec.name, *en, *zh, std::abs(*en - *zh)});
    }
    return out;
}

// --- reports ---

json AnalysisReport::to_json() const {
    json models = json::array();
    for (const auto& [spec, table] : tables) {
        json entry{{"name", spec.name}, {"family", spec.family}, {"table", table.to_json()}};
        if (spec.params_total) entry["params_total"] = *spec.params_total;
        entry["thinking"] = spec.thinking;
        models.push_back(entry);
    }
    json j{{"models", models}};
    if (pearson) j["pearson"] = pearson->to_json();
    if (deltas) j["thinking_deltas"] = deltas->to_json();
    if (distribution) {
        json d;
        for (const auto& [dim, s] : *distribution) d[std::string(dimension_code(dim))] = s.to_json();
        j["distribution"] = d;
    }
    if (languages) {
        json l = json::array();
        for (const auto& s : *languages)
            l.push_back(json{{"model", s.model}, {"en", s.en}, {"zh", s.zh}, {"diff", s.abs_diff}});
        j["languages"] = l;
    }
    return j;
}

AnalysisReport AnalysisReport::from_json(const json& j) {
    AnalysisReport report;
    for (const auto& mj : j.at("models")) {
        ModelSpec spec;
        spec.name = mj.at("name").get<std::string>();
        spec.family = mj.value("family", "");
        if (mj.contains("params_total")) spec.params_total = mj["params_total"].get<double>();
        spec.thinking = mj.value("thinking", false);
        report.tables.emplace_back(spec, ScoreTable::from_json(mj.at("table")));
    }
    if (j.contains("pearson")) {
        PearsonResult p;
        for (const auto& [col, v] : j["pearson"].at("mean_r").items())
            p.mean_r[col] = v.get<double>();
        for (const auto& fj : j["pearson"].value("families", json::array())) {
            FamilyCorrelation fc;
            fc.family = fj.at("family").get<std::string>();
            fc.members = fj.value("members", 0u);
            for (const auto& [col, v] : fj.at("r").items()) fc.r[col] = v.get<double>();
            p.families.push_back(std::move(fc));
        }
        for (const auto& s : j["pearson"].value("skipped", json::array()))
            p.skipped.push_back(s.get<std::string>());
        report.pearson = std::move(p);
    }
    if (j.contains("thinking_deltas")) {
        DeltaResult d;
        for (const auto& [col, v] : j["thinking_deltas"].at("mean_delta").items())
            d.mean_delta[col] = v.get<double>();
        d.pair_count = j["thinking_deltas"].value("pair_count", 0u);
        report.deltas = std::move(d);
    }
    if (j.contains("distribution")) {
        std::map<Dimension, FiveNumberSummary> dist;
        for (const auto& [code, sj] : j["distribution"].items()) {
            auto dim = parse_dimension(code);
            if (!dim) continue;
            FiveNumberSummary s;
            s.min = sj.value("min", 0.0);
            s.q1 = sj.value("q1", 0.0);
            s.median = sj.value("median", 0.0);
            s.q3 = sj.value("q3", 0.0);
            s.max = sj.value("max", 0.0);
            s.mean = sj.value("mean", 0.0);
            dist[*dim] = s;
        }
        report.distribution = std::move(dist);
    }
    if (j.contains("languages")) {
        std::vector<LanguageSplit> langs;
        for (const auto& lj : j["languages"])
            langs.push_back(LanguageSplit{lj.at("model").get<std::string>(),
                                          lj.at("en").get<double>(), lj.at("zh").get<double>(),
                                          lj.at("diff").get<double>()});
        report.languages = std::move(langs);
    }
    return report;
}

namespace {

std::string fmt_score(double v) { return fmt::format("{:.2f}", v); }

std::string render_markdown(const AnalysisReport& report) {
    std::string out = "# Evaluation report\n\n## Scores\n\n";
    out += "| Model | Avg |";
    for (Dimension d : kAllDimensions) out += fmt::format(" {} |", dimension_code(d));
    out += "\n|---|---|";
    for (std::size_t i = 0; i < kAllDimensions.size(); ++i) out += "---|";
    out += "\n";
    for (const auto& [spec, table] : report.tables) {
        out += fmt::format("| {} | {} |", spec.name, fmt_score(table.avg()));
        for (Dimension d : kAllDimensions) {
            auto it = table.by_dimension.find(d);
            out += it == table.by_dimension.end() ? " - |" : fmt::format(" {} |", fmt_score(it->second));
        }
        out += "\n";
    }
    if (report.pearson) {
        out += "\n## Scale correlation (Pearson r, mean over families)\n\n| Column | r |\n|---|---|\n";
        for (const auto& col : score_columns()) {
            auto it = report.pearson->mean_r.find(col);
            if (it != report.pearson->mean_r.end())
                out += fmt::format("| {} | {} |\n", col, fmt_score(it->second));
        }
    }
    if (report.deltas) {
        out += fmt::format("\n## Thinking deltas ({} pairs)\n\n| Column | delta |\n|---|---|\n",
                           report.deltas->pair_count);
        for (const auto& col : score_columns()) {
            auto it = report.deltas->mean_delta.find(col);
            if (it != report.deltas->mean_delta.end())
                out += fmt::format("| {} | {:+.2f} |\n", col, it->second);
        }
    }
    if (report.distribution) {
        out += "\n## Dimension distribution\n\n| Dim | min | q1 | median | q3 | max | mean |\n"
               "|---|---|---|---|---|---|---|\n";
        for (const auto& [dim, s] : *report.distribution)
            out += fmt::format("| {} | {} | {} | {} | {} | {} | {} |\n", dimension_code(dim),
                               fmt_score(s.min), fmt_score(s.q1), fmt_score(s.median),
                               fmt_score(s.q3), fmt_score(s.max), fmt_score(s.mean));
    }
    if (report.languages) {
        out += "\n## Language split\n\n| Model | en | zh | diff |\n|---|---|---|---|\n";
        for (const auto& s : *report.languages)
            out += fmt::format("| {} | {} | {} | {} |\n", s.model, fmt_score(s.en), fmt_score(s.zh),
                               fmt_score(s.abs_diff));
    }
    return out;
}

std::string render_csv(const AnalysisReport& report) {
    std::string out = "model,avg";
    for (Dimension d : kAllDimensions) out += fmt::format(",{}", dimension_code(d));
    out += "\n";
    for (const auto& [spec, table] : report.tables) {
        out += fmt::format("{},{}", spec.name, fmt_score(table.avg()));
        for (Dimension d : kAllDimensions) {
            auto it = table.by_dimension.find(d);
            out += it == table.by_dimension.end() ? "," : fmt::format(",{}", fmt_score(it->second));
        }
        out += "\n";
    }
    return out;
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const AnalysisReport& report,
                                               const std::filesystem::path& out_dir,
                                               const std::vector<std::string>& formats) {
    if (report.tables.empty()) throw Error("emit_report: no model tables to report");
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    for (const auto& format : formats) {
        std::filesystem::path path = out_dir / ("report." + format);
        if (format == "json") {
            write_text_file(path, report.to_json().dump(2) + "\n");
        } else if (format == "md") {
            write_text_file(path, render_markdown(report));
        } else if (format == "csv") {
            write_text_file(path, render_csv(report));
        } else {
            throw ConfigError("unknown report format: " + format);
        }
        written.push_back(path);
    }
    return written;
}

}  // namespace irbench
