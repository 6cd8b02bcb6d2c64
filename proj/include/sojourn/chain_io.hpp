#pragma once

// Chain descriptions: JSON files and the inline lr grammar
// "L=<int>,R=<int>,pi=<c_-L>,...,<c_R>".

#include "chain.hpp"
#include "errors.hpp"
#include "scalar.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sojourn {

struct ChainSource {
    enum class Kind { finite, lr };
    Kind kind = Kind::lr;
    std::optional<FiniteChain<Rational>> chain;
    std::optional<Partition> partition;
    std::optional<JumpDistribution<Rational>> jump;

    bool is_lr() const { return kind == Kind::lr; }
    const JumpDistribution<Rational>& lr() const
    {
        if (!jump) throw input_error("chain is not an (L,R) walk");
        return *jump;
    }
};

namespace detail {

inline Rational parse_probability(const nlohmann::json& v)
{
    try {
        if (v.is_string()) return scalar_traits<Rational>::parse(v.get<std::string>());
        if (v.is_number_integer()) return Rational(v.get<long>());
        if (v.is_number()) return scalar_traits<Rational>::parse(v.dump());
    } catch (const input_error&) {
        throw;
    } catch (const std::exception& e) {
        throw input_error(std::string("bad probability ") + v.dump() + ": " + e.what());
    }
    throw input_error("probability must be a string or a number, got " + v.dump());
}

inline std::vector<std::size_t> parse_states(const nlohmann::json& doc, const char* key)
{
    if (!doc.contains(key)) return {};
    const auto& arr = doc.at(key);
    if (!arr.is_array()) throw input_error(std::string(key) + " must be an array");
    std::vector<std::size_t> out;
    for (const auto& v : arr) {
        if (!v.is_number_integer() || v.get<long>() < 0) throw input_error(std::string(key) + " holds a bad state index");
        out.push_back(v.get<std::size_t>());
    }
    return out;
}

inline int parse_int_field(const nlohmann::json& doc, const char* key)
{
    if (!doc.contains(key) || !doc.at(key).is_number_integer()) {
        throw input_error(std::string("missing integer field ") + key);
    }
    return doc.at(key).get<int>();
}

}  // namespace detail

inline ChainSource lr_source(JumpDistribution<Rational> jump)
{
    ChainSource src;
    src.kind = ChainSource::Kind::lr;
    src.jump = std::move(jump);
    return src;
}

inline ChainSource parse_chain_json(const nlohmann::json& doc)
{
    if (!doc.is_object() || !doc.contains("type") || !doc.at("type").is_string()) {
        throw input_error("chain JSON needs a \"type\" of \"finite\" or \"lr\"");
    }
    const std::string type = doc.at("type").get<std::string>();
    try {
        if (type == "lr") {
            const int L = detail::parse_int_field(doc, "L");
            const int R = detail::parse_int_field(doc, "R");
            if (!doc.contains("pi") || !doc.at("pi").is_array()) throw input_error("lr chain needs a \"pi\" array");
            std::vector<Rational> pi;
            for (const auto& v : doc.at("pi")) pi.push_back(detail::parse_probability(v));
            return lr_source(JumpDistribution<Rational>(L, R, std::move(pi)));
        }
        if (type == "finite") {
            if (!doc.contains("P") || !doc.at("P").is_array()) throw input_error("finite chain needs a \"P\" matrix");
            std::vector<std::vector<Rational>> p;
            for (const auto& row : doc.at("P")) {
                if (!row.is_array()) throw input_error("each row of P must be an array");
                std::vector<Rational> r;
                for (const auto& v : row) r.push_back(detail::parse_probability(v));
                p.push_back(std::move(r));
            }
            ChainSource src;
            src.kind = ChainSource::Kind::finite;
            src.chain.emplace(std::move(p));
            src.partition.emplace(src.chain->size(), detail::parse_states(doc, "E_circ"),
                                  detail::parse_states(doc, "E_plus"), detail::parse_states(doc, "E_minus"));
            return src;
        }
    } catch (const input_error&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw input_error(e.what());
    }
    throw input_error("unknown chain type \"" + type + "\"");
}

inline ChainSource parse_chain_text(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw input_error(std::string("chain JSON does not parse: ") + e.what());
    }
    return parse_chain_json(doc);
}

inline ChainSource load_chain_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw input_error("cannot open chain file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_chain_text(buf.str());
}

/// "L=1,R=1,pi=1/2,0,1/2": every token after pi= is one probability.
inline ChainSource parse_lr_inline(const std::string& text)
{
    std::vector<std::string> tokens;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) tokens.push_back(detail::trim(tok));

    std::optional<int> L, R;
    std::vector<Rational> pi;
    bool in_pi = false;
    auto to_int = [&](const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            int k = std::stoi(v, &used);
            if (used != v.size()) throw std::invalid_argument("trailing");
            return k;
        } catch (const std::exception&) {
            throw input_error("inline lr: " + key + " must be an integer, got '" + v + "'");
        }
    };
    for (const std::string& t : tokens) {
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            if (!in_pi) throw input_error("inline lr: unexpected token '" + t + "'");
        } else {
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string val = detail::trim(t.substr(eq + 1));
            if (key == "L") {
                L = to_int(key, val);
                in_pi = false;
                continue;
            }
            if (key == "R") {
                R = to_int(key, val);
                in_pi = false;
                continue;
            }
            if (key != "pi") throw input_error("inline lr: unknown key '" + key + "'");
            in_pi = true;
            if (!pi.empty()) throw input_error("inline lr: pi given twice");
            try {
                pi.push_back(scalar_traits<Rational>::parse(val));
            } catch (const std::exception& e) {
                throw input_error("inline lr: bad probability '" + val + "'");
            }
            continue;
        }
        try {
            pi.push_back(scalar_traits<Rational>::parse(t));
        } catch (const std::exception& e) {
            throw input_error("inline lr: bad probability '" + t + "'");
        }
    }
    if (!L || !R) throw input_error("inline lr needs L= and R=");
    if (pi.empty()) throw input_error("inline lr needs pi=");
    try {
        return lr_source(JumpDistribution<Rational>(*L, *R, std::move(pi)));
    } catch (const std::invalid_argument& e) {
        throw input_error(std::string("inline lr: ") + e.what());
    }
}

inline nlohmann::json to_json(const JumpDistribution<Rational>& jump)
{
    nlohmann::json pi = nlohmann::json::array();
    for (const auto& p : jump.probs()) pi.push_back(scalar_traits<Rational>::format(p));
    return {{"type", "lr"}, {"L", jump.L()}, {"R", jump.R()}, {"pi", pi}};
}

inline nlohmann::json to_json(const FiniteChain<Rational>& chain, const Partition& part)
{
    nlohmann::json p = nlohmann::json::array();
    for (std::size_t i = 0; i < chain.size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& v : chain.row(i)) row.push_back(scalar_traits<Rational>::format(v));
        p.push_back(row);
    }
    return {{"type", "finite"},
            {"P", p},
            {"E_circ", part.e_circ()},
            {"E_plus", part.e_plus()},
            {"E_minus", part.e_minus()}};
}

}  // namespace sojourn
