#pragma once

// Comparison records between a displayed formula and the structural value
// (which the oracle backs). Mismatches are report content, not faults.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace sojourn {

enum class Verdict { match, mismatch, skipped };

inline const char* to_string(Verdict v)
{
    switch (v) {
        case Verdict::match: return "MATCH";
        case Verdict::mismatch: return "MISMATCH";
        case Verdict::skipped: return "SKIPPED";
    }
    return "?";
}

struct GridStats {
    int points = 0;
    double max_abs_diff = 0;
    double max_rel_diff = 0;
    double min_ratio = std::numeric_limits<double>::infinity();   // printed / structural
    double max_ratio = -std::numeric_limits<double>::infinity();
    double max_scaled_diff = 0;  // |printed - structural| / max(1, |structural|), drives the verdict
};

struct ErratumEntry {
    std::string formula_id;
    std::string note;
    GridStats grid;
    Verdict verdict = Verdict::skipped;
    double worst_x = 0;
    double worst_y = 0;
    double structural_value = 0;
    double printed_value = 0;
};

inline constexpr double kMatchTolerance = 1e-9;

/// Accumulates printed-vs-structural samples into one entry.
class EntryBuilder {
public:
    EntryBuilder(std::string id, std::string note, double tol = kMatchTolerance) : tol_(tol)
    {
        e_.formula_id = std::move(id);
        e_.note = std::move(note);
    }

    void add(double x, double y, double structural, double printed)
    {
        GridStats& g = e_.grid;
        ++g.points;
        const double abs_diff = std::fabs(printed - structural);
        const double rel = abs_diff / std::max(std::fabs(structural), 1e-300);
        if (structural != 0) {
            const double ratio = printed / structural;
            g.min_ratio = std::min(g.min_ratio, ratio);
            g.max_ratio = std::max(g.max_ratio, ratio);
        }
        g.max_abs_diff = std::max(g.max_abs_diff, abs_diff);
        g.max_scaled_diff = std::max(g.max_scaled_diff, abs_diff / std::max(1.0, std::fabs(structural)));
        if (!std::isfinite(printed)) g.max_scaled_diff = std::numeric_limits<double>::infinity();
        if (rel > g.max_rel_diff || g.points == 1) {
            g.max_rel_diff = std::max(g.max_rel_diff, rel);
            e_.worst_x = x;
            e_.worst_y = y;
            e_.structural_value = structural;
            e_.printed_value = printed;
        }
    }

    ErratumEntry finish() const
    {
        ErratumEntry e = e_;
        if (e.grid.points == 0) {
            e.verdict = Verdict::skipped;
        } else {
            e.verdict = e.grid.max_scaled_diff <= tol_ ? Verdict::match : Verdict::mismatch;
        }
        return e;
    }

private:
    ErratumEntry e_;
    double tol_;
};

struct ErratumReport {
    std::string subject;
    std::vector<ErratumEntry> entries;

    const ErratumEntry* find(const std::string& id) const
    {
        for (const auto& e : entries)
            if (e.formula_id == id) return &e;
        return nullptr;
    }
    int count(Verdict v) const
    {
        return static_cast<int>(std::count_if(entries.begin(), entries.end(),
                                              [v](const ErratumEntry& e) { return e.verdict == v; }));
    }
};

inline nlohmann::json to_json(const ErratumEntry& e)
{
    auto finite = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return nullptr;
    };
    return nlohmann::json{{"formula_id", e.formula_id},
                          {"note", e.note},
                          {"verdict", to_string(e.verdict)},
                          {"grid_stats",
                           {{"points", e.grid.points},
                            {"max_abs_diff", finite(e.grid.max_abs_diff)},
                            {"max_rel_diff", finite(e.grid.max_rel_diff)},
                            {"min_ratio", finite(e.grid.min_ratio)},
                            {"max_ratio", finite(e.grid.max_ratio)},
                            {"max_scaled_diff", finite(e.grid.max_scaled_diff)}}},
                          {"worst_point", {{"x", e.worst_x}, {"y", e.worst_y}}},
                          {"structural_value", finite(e.structural_value)},
                          {"printed_value", finite(e.printed_value)}};
}

inline nlohmann::json to_json(const ErratumReport& r)
{
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : r.entries) entries.push_back(to_json(e));
    return nlohmann::json{{"subject", r.subject},
                          {"match", r.count(Verdict::match)},
                          {"mismatch", r.count(Verdict::mismatch)},
                          {"entries", entries}};
}

}  // namespace sojourn
