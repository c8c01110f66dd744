#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "micon/errors.hpp"
#include "micon/eval.hpp"

namespace micon::eval {

Constraint constraint_from_string(const std::string& s) {
    if (s == "none") return Constraint::none;
    if (s == "nsb" || s == "NSB") return Constraint::nsb;
    if (s == "nss" || s == "NSS") return Constraint::nss;
    throw ConfigError("eval.constraint must be one of none|nsb|nss, got '" + s + "'");
}

std::string constraint_to_string(Constraint c) {
    switch (c) {
        case Constraint::none: return "none";
        case Constraint::nsb: return "NSB";
        case Constraint::nss: return "NSS";
    }
    return "?";
}

RetrievalReport retrieve_1nn(const std::vector<WellEmbedding>& query,
                             const std::vector<WellEmbedding>& retrieval, Constraint constraint) {
    if (retrieval.empty()) throw EvalError("retrieve_1nn: empty retrieval set");

    // key-sorted candidate order makes tie handling deterministic
    std::vector<size_t> order(retrieval.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::string> keys(retrieval.size());
    for (size_t i = 0; i < retrieval.size(); ++i) keys[i] = retrieval[i].key();
    std::sort(order.begin(), order.end(),
              [&keys](size_t a, size_t b) { return keys[a] < keys[b]; });

    std::set<std::string> perturbations;
    for (const auto& r : retrieval) perturbations.insert(r.perturbation_id);

    RetrievalReport rep;
    rep.constraint = constraint;
    rep.n_queries = query.size();
    rep.chance_level = 1.0 / static_cast<double>(perturbations.size());
    rep.per_query.reserve(query.size());

    for (const auto& q : query) {
        const std::string qkey = q.key();
        const size_t npick = SIZE_MAX;
        size_t best = npick;
        double best_dist = 0.0;
        for (size_t oi : order) {
            const auto& cand = retrieval[oi];
            if (keys[oi] == qkey) continue;  // never self-match
            if (constraint == Constraint::nsb && cand.batch_key() == q.batch_key()) continue;
            if (constraint == Constraint::nss && cand.source_id == q.source_id) continue;
            const double dist = 1.0 - math::cosine_similarity(q.vec, cand.vec);
            if (best == npick || dist < best_dist) {
                best = oi;
                best_dist = dist;
            }
        }
        if (best == npick)
            throw EvalError("retrieve_1nn: no eligible " + constraint_to_string(constraint) +
                            " candidate for query well " + qkey);
        QueryMatch m;
        m.query_key = qkey;
        m.matched_key = keys[best];
        m.correct = retrieval[best].perturbation_id == q.perturbation_id;
        if (m.correct) ++rep.n_correct;
        rep.per_query.push_back(std::move(m));
    }
    rep.accuracy = rep.n_queries == 0
                       ? 0.0
                       : static_cast<double>(rep.n_correct) / static_cast<double>(rep.n_queries);
    return rep;
}

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string report_to_json(const RetrievalReport& report) {
    char buf[64];
    std::string out = "{\n";
    out += "  \"constraint\": \"" + constraint_to_string(report.constraint) + "\",\n";
    out += "  \"n_queries\": " + std::to_string(report.n_queries) + ",\n";
    out += "  \"n_correct\": " + std::to_string(report.n_correct) + ",\n";
    std::snprintf(buf, sizeof buf, "%.17g", report.accuracy);
    out += std::string("  \"accuracy\": ") + buf + ",\n";
    std::snprintf(buf, sizeof buf, "%.17g", report.chance_level);
    out += std::string("  \"chance_level\": ") + buf + ",\n";
    out += "  \"per_query\": [\n";
    for (size_t i = 0; i < report.per_query.size(); ++i) {
        const auto& m = report.per_query[i];
        out += "    {\"query\": \"" + json_escape(m.query_key) + "\", \"matched\": \"" +
               json_escape(m.matched_key) + "\", \"correct\": " + (m.correct ? "true" : "false") +
               "}";
        out += i + 1 < report.per_query.size() ? ",\n" : "\n";
    }
    out += "  ]\n}\n";
    return out;
}

}  // namespace micon::eval
