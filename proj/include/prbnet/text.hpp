#ifndef PRBNET_TEXT_HPP
#define PRBNET_TEXT_HPP

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "prbnet/errors.hpp"
#include "prbnet/weights.hpp" // prng

namespace prbnet {

struct Token {
    std::string surface; // lowercase, no punctuation
    int position = 0;    // piece index in the prompt, before stop-word removal
};

struct StopWords {
    std::unordered_set<std::string> words;

    static StopWords load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw IoError("cannot open stop-word file '" + path + "'");
        StopWords sw;
        std::string w;
        while (is >> w) sw.words.insert(w);
        return sw;
    }
};

// lowercase, split on anything that is not [a-z0-9], drop stop words
inline std::vector<Token> tokenize(const std::string& prompt, const StopWords& stop) {
    std::vector<Token> out;
    std::string cur;
    int piece = 0;
    auto flush = [&] {
        if (!cur.empty()) {
            if (!stop.words.count(cur)) out.push_back({cur, piece});
            ++piece;
            cur.clear();
        }
    };
    for (unsigned char ch : prompt) {
        if (std::isalnum(ch))
            cur.push_back(static_cast<char>(std::tolower(ch)));
        else
            flush();
    }
    flush();
    return out;
}

// Rule-based English lemmatizer: exception table first, then ordered suffix
// rules (-ies, -es, -s, -ing, -ed) with consonant-undoubling and silent-e
// restoration on the verb suffixes.
class Lemmatizer {
public:
    static Lemmatizer load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw IoError("cannot open lemma exception file '" + path + "'");
        Lemmatizer lm;
        std::string surface, lemma;
        while (is >> surface >> lemma) lm.exceptions_[surface] = lemma;
        return lm;
    }

    std::string lemmatize(const std::string& token) const {
        auto it = exceptions_.find(token);
        if (it != exceptions_.end()) return it->second;

        if (ends_with(token, "ies") && token.size() > 4)
            return token.substr(0, token.size() - 3) + "y";
        if (es_rule_applies(token)) return token.substr(0, token.size() - 2);
        if (ends_with(token, "s") && token.size() > 3 && !ends_with(token, "ss") &&
            !ends_with(token, "us") && !ends_with(token, "is"))
            return token.substr(0, token.size() - 1);
        if (ends_with(token, "ing") && token.size() > 3) {
            std::string stem = token.substr(0, token.size() - 3);
            if (has_vowel(stem)) return fix_stem(stem);
        }
        if (ends_with(token, "ed") && token.size() > 2) {
            std::string stem = token.substr(0, token.size() - 2);
            if (stem.size() >= 2 && has_vowel(stem) && stem.back() != 'e') return fix_stem(stem);
        }
        return token;
    }

private:
    std::unordered_map<std::string, std::string> exceptions_;

    static bool ends_with(const std::string& s, const std::string& suf) {
        return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
    }
    static bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }
    static bool has_vowel(const std::string& s) {
        for (char c : s)
            if (is_vowel(c)) return true;
        return false;
    }

    // drop -es only after a sibilant cluster or o (boxes, dishes, goes);
    // plain -s plurals like "houses" fall through to the -s rule
    static bool es_rule_applies(const std::string& t) {
        return ends_with(t, "sses") || ends_with(t, "shes") || ends_with(t, "ches") ||
               ends_with(t, "xes") || ends_with(t, "zes") || ends_with(t, "oes");
    }

    // after stripping -ing/-ed: undouble a doubled final consonant
    // (running -> run); restore a silent e on short C-V-C stems (mak -> make)
    static std::string fix_stem(std::string stem) {
        static const std::string doublable = "bdgmnprt";
        size_t n = stem.size();
        if (n >= 2 && stem[n - 1] == stem[n - 2] &&
            doublable.find(stem[n - 1]) != std::string::npos) {
            stem.pop_back();
            return stem;
        }
        if (n >= 3 && n <= 4) {
            char a = stem[n - 3], b = stem[n - 2], c = stem[n - 1];
            if (!is_vowel(a) && is_vowel(b) && !is_vowel(c) && c != 'w' && c != 'x' && c != 'y')
                stem.push_back('e');
        }
        return stem;
    }
};

// Static embedding table with a deterministic out-of-vocabulary fallback:
//   state = mix64(fnv1a64(term) ^ (oov_salt * 0x9E3779B97F4A7C15))
//   x_i   = mix64(state + (i+1) * 0x9E3779B97F4A7C15)
//   v_i   = 2 * ((x_i >> 11) / 2^53) - 1, then normalize to unit length
struct EmbeddingTable {
    int dim = 0;
    uint64_t oov_salt = 0;
    std::unordered_map<std::string, std::vector<float>> entries;

    static EmbeddingTable load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw IoError("cannot open embedding file '" + path + "'");
        EmbeddingTable t;
        std::string tag;
        if (!(is >> tag >> t.dim >> t.oov_salt) || tag != "d" || t.dim < 1)
            throw IoError("bad embedding file header in '" + path + "' (want: d <dim> <salt>)");
        std::string term;
        while (is >> term) {
            std::vector<float> v(t.dim);
            for (float& x : v)
                if (!(is >> x)) throw IoError("truncated vector for term '" + term + "'");
            t.entries[term] = std::move(v);
        }
        return t;
    }
};

inline std::vector<float> embed(const std::string& term, const EmbeddingTable& table) {
    if (term.empty()) throw ArgumentError("embed: term must be non-empty");
    auto it = table.entries.find(term);
    if (it != table.entries.end()) return it->second;
    uint64_t state = prng::mix64(prng::fnv1a64(term) ^ (table.oov_salt * 0x9E3779B97F4A7C15ull));
    std::vector<float> v(table.dim);
    double norm_sq = 0.0;
    for (int i = 0; i < table.dim; ++i) {
        uint64_t x = prng::mix64(state + static_cast<uint64_t>(i + 1) * 0x9E3779B97F4A7C15ull);
        double u = static_cast<double>(x >> 11) * (1.0 / 9007199254740992.0);
        v[i] = static_cast<float>(2.0 * u - 1.0);
        norm_sq += static_cast<double>(v[i]) * v[i];
    }
    double inv = 1.0 / std::sqrt(norm_sq);
    for (float& x : v) x = static_cast<float>(x * inv);
    return v;
}

struct CategoryClass {
    std::string name; // multi-word names use underscore joining
    std::vector<float> vector;
    int class_id = 0;
};

struct CategoryVocab {
    int dim = 0;
    std::vector<CategoryClass> classes; // ordered by dense class_id 0..n-1

    static CategoryVocab load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw IoError("cannot open vocab file '" + path + "'");
        CategoryVocab v;
        std::string tag;
        uint64_t salt_unused;
        if (!(is >> tag >> v.dim >> salt_unused) || tag != "d" || v.dim < 1)
            throw IoError("bad vocab file header in '" + path + "' (want: d <dim> <salt>)");
        int id;
        std::string name;
        while (is >> id >> name) {
            CategoryClass c;
            c.class_id = id;
            c.name = name;
            c.vector.resize(v.dim);
            for (float& x : c.vector)
                if (!(is >> x)) throw IoError("truncated vector for class '" + name + "'");
            if (id != static_cast<int>(v.classes.size()))
                throw IoError("vocab class ids must be dense 0..n-1 (got " + std::to_string(id) + ")");
            v.classes.push_back(std::move(c));
        }
        if (v.classes.empty()) throw IoError("vocab file '" + path + "' has no classes");
        return v;
    }

    int find(const std::string& name) const {
        for (const CategoryClass& c : classes)
            if (c.name == name) return c.class_id;
        return -1;
    }
};

inline double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// argmax_j cos(v, C_j); ties broken by smaller class_id
inline std::pair<int, double> map_to_category(const std::vector<float>& v,
                                              const CategoryVocab& vocab) {
    double nv = 0;
    for (float x : v) nv += static_cast<double>(x) * x;
    if (nv == 0.0) throw ArgumentError("map_to_category: zero query vector");
    if (v.size() != static_cast<size_t>(vocab.dim))
        throw ArgumentError("map_to_category: dimension mismatch");
    int best = 0;
    double best_score = cosine(v, vocab.classes[0].vector);
    for (size_t j = 1; j < vocab.classes.size(); ++j) {
        double sc = cosine(v, vocab.classes[j].vector);
        if (sc > best_score) {
            best_score = sc;
            best = static_cast<int>(j);
        }
    }
    return {best, best_score};
}

// prompt-derived category id set with per-class (lemma, score) provenance
struct PromptClassSet {
    std::set<int> class_ids;
    std::map<int, std::vector<std::pair<std::string, double>>> provenance;

    void admit(int id, const std::string& lemma, double score) {
        class_ids.insert(id);
        provenance[id].emplace_back(lemma, score);
    }
};

// Admission per lemma: exact class-name match (incl. underscore-joined
// bigrams of consecutive lemmas) scores 1.0; otherwise the cosine argmax
// class is admitted iff its score >= tau.
inline PromptClassSet compare(const std::vector<std::string>& lemmas, const EmbeddingTable& table,
                              const CategoryVocab& vocab, double tau) {
    if (tau <= 0.0 || tau > 1.0) throw ArgumentError("compare: tau must be in (0, 1]");
    PromptClassSet out;
    for (size_t i = 0; i < lemmas.size(); ++i) {
        int exact = vocab.find(lemmas[i]);
        if (exact >= 0) out.admit(exact, lemmas[i], 1.0);
        if (i + 1 < lemmas.size()) {
            std::string bigram = lemmas[i] + "_" + lemmas[i + 1];
            int bid = vocab.find(bigram);
            if (bid >= 0) out.admit(bid, bigram, 1.0);
        }
        auto [j, score] = map_to_category(embed(lemmas[i], table), vocab);
        if (score >= tau) out.admit(j, lemmas[i], score);
    }
    return out;
}

inline PromptClassSet prompt_to_classes(const std::string& prompt, const StopWords& stop,
                                        const Lemmatizer& lm, const EmbeddingTable& table,
                                        const CategoryVocab& vocab, double tau) {
    std::vector<std::string> lemmas;
    for (const Token& t : tokenize(prompt, stop)) lemmas.push_back(lm.lemmatize(t.surface));
    return compare(lemmas, table, vocab, tau);
}

} // namespace prbnet

#endif
