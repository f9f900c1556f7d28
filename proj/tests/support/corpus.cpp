#include "corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace sscd::testing {

namespace {

enum class Kind { ident, keyword, num, str, chr, punct };

struct Tok {
    std::string text;
    Kind kind;
};

struct Line {
    int depth = 0;
    std::vector<Tok> toks;
};

using Stmt = std::vector<Line>;

struct Profile {
    std::vector<double> stmt_weights;
    std::vector<double> op_weights;
    double literal_bias = 0.5;
    std::vector<std::string> vars;
    std::set<std::string> used;
};

struct Function {
    Profile profile;
    Line header;
    std::vector<Stmt> body;
    Line ret;
};

Tok id(std::string s) { return {std::move(s), Kind::ident}; }
Tok kw(std::string s) { return {std::move(s), Kind::keyword}; }
Tok p(std::string s) { return {std::move(s), Kind::punct}; }

const std::vector<std::string> kWords = {
    "count", "total", "idx",  "len",  "buf",  "tmp",   "acc",    "val",   "res",   "key",
    "pos",   "step",  "limit", "flag", "sum",  "mask",  "cur",    "prev",  "next",  "width",
    "height", "off",  "size", "node", "item", "data",  "left",   "right", "lo",    "hi",
    "bits",  "delta", "score", "rate", "base", "carry", "weight", "seed",  "depth", "span"};

const std::vector<std::string> kCallees = {"emit", "check", "push", "update", "log_value",
                                           "hash_step", "reset", "visit", "store", "fetch"};

const std::vector<std::string> kTypes = {"int", "long", "unsigned", "double", "short", "char"};

const std::vector<std::string> kBinOps = {"+", "-", "*", "/", "%", "&", "|", "^", "<<", ">>"};
const std::vector<std::string> kRelOps = {"<", ">", "<=", ">=", "==", "!="};
const std::vector<std::string> kAssignOps = {"=", "+=", "-=", "*=", "^=", "|=", "&=", "<<="};

constexpr std::size_t kStmtKinds = 12;

class Generator {
public:
    explicit Generator(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64& rng() { return rng_; }

    std::size_t uniform(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

    template <class T>
    const T& pick(const std::vector<T>& v) { return v[uniform(v.size())]; }

    std::string fresh_name() {
        for (;;) {
            std::string name = pick(kWords);
            if (unit() < 0.5) name += "_" + pick(kWords);
            if (unit() < 0.3) name += std::to_string(uniform(10));
            if (used_.insert(name).second) return name;
        }
    }

    // A function with its own statement and operator mix.
    Function function() {
        used_.clear();
        vars_.clear();
        stmt_weights_.assign(kStmtKinds, 0.0);
        for (auto& w : stmt_weights_) w = std::pow(unit(), 3.0) + 0.02;
        op_weights_.assign(kBinOps.size(), 0.0);
        for (auto& w : op_weights_) w = std::pow(unit(), 3.0) + 0.02;
        literal_bias_ = unit();

        Function f;
        const std::string ret_type = pick(kTypes);
        f.header.toks = {kw("static"), kw(ret_type), id(fresh_name()), p("(")};
        std::size_t params = 1 + uniform(3);
        for (std::size_t i = 0; i < params; ++i) {
            if (i) f.header.toks.push_back(p(","));
            f.header.toks.push_back(kw(pick(kTypes)));
            vars_.push_back(fresh_name());
            f.header.toks.push_back(id(vars_.back()));
        }
        f.header.toks.push_back(p(")"));
        f.header.toks.push_back(p("{"));

        std::size_t statements = 6 + uniform(9);
        for (std::size_t i = 0; i < statements; ++i) f.body.push_back(statement(1));
        f.ret.depth = 1;
        f.ret.toks = {kw("return")};
        append(f.ret.toks, expr(1));
        f.ret.toks.push_back(p(";"));
        f.profile = {stmt_weights_, op_weights_, literal_bias_, vars_, used_};
        return f;
    }

    // Continue generating in the style and scope of an existing function.
    void adopt(const Function& f) {
        stmt_weights_ = f.profile.stmt_weights;
        op_weights_ = f.profile.op_weights;
        literal_bias_ = f.profile.literal_bias;
        vars_ = f.profile.vars;
        used_ = f.profile.used;
    }

    // A statement drawn from the current function's mix.
    Stmt statement(int depth, bool compound_ok = true) {
        std::discrete_distribution<std::size_t> dist(stmt_weights_.begin(), stmt_weights_.end());
        for (;;) {
            std::size_t kind = dist(rng_);
            if (!compound_ok && is_compound(kind)) continue;
            return make(kind, depth);
        }
    }

private:
    static bool is_compound(std::size_t kind) { return kind == 2 || kind == 3 || kind == 4 || kind == 5 || kind == 8 || kind == 9; }

    static void append(std::vector<Tok>& out, const std::vector<Tok>& in) { out.insert(out.end(), in.begin(), in.end()); }

    std::string var() {
        if (vars_.empty() || unit() < 0.15) {
            vars_.push_back(fresh_name());
        }
        return pick(vars_);
    }

    Tok literal() {
        if (unit() < literal_bias_ * 0.2) return {"'" + std::string(1, static_cast<char>('a' + uniform(26))) + "'", Kind::chr};
        if (unit() < 0.15) return {std::to_string(uniform(100)) + "." + std::to_string(uniform(10)), Kind::num};
        return {std::to_string(uniform(1000)), Kind::num};
    }

    std::vector<Tok> atom() {
        double r = unit();
        if (r < 0.55) return {id(var())};
        if (r < 0.8) return {literal()};
        if (r < 0.9) return {id(var()), p("["), id(var()), p("]")};
        return {id(pick(kCallees)), p("("), id(var()), p(")")};
    }

    std::vector<Tok> expr(int budget) {
        if (budget <= 0 || unit() < 0.35) return atom();
        std::discrete_distribution<std::size_t> dist(op_weights_.begin(), op_weights_.end());
        std::vector<Tok> out;
        bool paren = unit() < 0.2;
        if (paren) out.push_back(p("("));
        append(out, expr(budget - 1));
        out.push_back(p(kBinOps[dist(rng_)]));
        append(out, atom());
        if (paren) out.push_back(p(")"));
        return out;
    }

    std::vector<Tok> cond() {
        std::vector<Tok> out = expr(1);
        out.push_back(p(pick(kRelOps)));
        append(out, atom());
        if (unit() < 0.2) {
            out.push_back(p(unit() < 0.5 ? "&&" : "||"));
            out.push_back(id(var()));
            out.push_back(p(pick(kRelOps)));
            out.push_back(literal());
        }
        return out;
    }

    Line line(int depth, std::vector<Tok> toks) { return Line{depth, std::move(toks)}; }

    void block(Stmt& s, int depth, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            Stmt inner = statement(depth, false);
            s.insert(s.end(), inner.begin(), inner.end());
        }
    }

    Stmt make(std::size_t kind, int depth) {
        Stmt s;
        switch (kind) {
            case 0: {
                std::string name = fresh_name();
                std::vector<Tok> t = {kw(pick(kTypes)), id(name), p("=")};
                append(t, expr(2));
                t.push_back(p(";"));
                vars_.push_back(name);
                s.push_back(line(depth, t));
                break;
            }
            case 1: {
                std::vector<Tok> t = {id(var()), p(pick(kAssignOps))};
                append(t, expr(2));
                t.push_back(p(";"));
                s.push_back(line(depth, t));
                break;
            }
            case 2:
            case 3: {
                std::vector<Tok> t = {kw("if"), p("(")};
                append(t, cond());
                append(t, {p(")"), p("{")});
                s.push_back(line(depth, t));
                block(s, depth + 1, 1 + uniform(2));
                if (kind == 3) {
                    s.push_back(line(depth, {p("}"), kw("else"), p("{")}));
                    block(s, depth + 1, 1);
                }
                s.push_back(line(depth, {p("}")}));
                break;
            }
            case 4: {
                std::string i = var();
                std::vector<Tok> t = {kw("for"), p("("), id(i),   p("="),    literal(), p(";"), id(i),
                                      p(pick(kRelOps)), id(var()), p(";"),  id(i),   p(unit() < 0.7 ? "++" : "--"),
                                      p(")"), p("{")};
                s.push_back(line(depth, t));
                block(s, depth + 1, 1 + uniform(2));
                s.push_back(line(depth, {p("}")}));
                break;
            }
            case 5: {
                std::vector<Tok> t = {kw("while"), p("(")};
                append(t, cond());
                append(t, {p(")"), p("{")});
                s.push_back(line(depth, t));
                block(s, depth + 1, 1 + uniform(2));
                if (unit() < 0.3) s.push_back(line(depth + 1, {kw("break"), p(";")}));
                s.push_back(line(depth, {p("}")}));
                break;
            }
            case 6: {
                std::vector<Tok> t = {id(pick(kCallees)), p("(")};
                std::size_t args = 1 + uniform(3);
                for (std::size_t a = 0; a < args; ++a) {
                    if (a) t.push_back(p(","));
                    append(t, atom());
                }
                append(t, {p(")"), p(";")});
                s.push_back(line(depth, t));
                break;
            }
            case 7: {
                std::vector<Tok> t = {id(var()), p("["), id(var()), p("]"), p("=")};
                append(t, expr(1));
                t.push_back(p(";"));
                s.push_back(line(depth, t));
                break;
            }
            case 8: {
                s.push_back(line(depth, {kw("switch"), p("("), id(var()), p(")"), p("{")}));
                std::size_t cases = 1 + uniform(2);
                for (std::size_t c = 0; c < cases; ++c) {
                    s.push_back(line(depth + 1, {kw("case"), literal(), p(":")}));
                    block(s, depth + 2, 1);
                    s.push_back(line(depth + 2, {kw("break"), p(";")}));
                }
                s.push_back(line(depth + 1, {kw("default"), p(":")}));
                block(s, depth + 2, 1);
                s.push_back(line(depth, {p("}")}));
                break;
            }
            case 9: {
                s.push_back(line(depth, {kw("do"), p("{")}));
                block(s, depth + 1, 1 + uniform(2));
                std::vector<Tok> t = {p("}"), kw("while"), p("(")};
                append(t, cond());
                append(t, {p(")"), p(";")});
                s.push_back(line(depth, t));
                break;
            }
            case 10: {
                if (unit() < 0.5) {
                    s.push_back(line(depth, {id(var()), p(unit() < 0.5 ? "++" : "--"), p(";")}));
                } else {
                    std::vector<Tok> t = {p("*"), id(var()), p("=")};
                    append(t, expr(1));
                    t.push_back(p(";"));
                    s.push_back(line(depth, t));
                }
                break;
            }
            default: {
                std::string text = "\"" + pick(kWords) + " %d\\n\"";
                s.push_back(line(depth, {id(pick(kCallees)), p("("), Tok{text, Kind::str}, p(","), id(var()), p(")"),
                                         p(";")}));
                break;
            }
        }
        return s;
    }

    std::mt19937_64 rng_;
    std::set<std::string> used_;
    std::vector<std::string> vars_;
    std::vector<double> stmt_weights_;
    std::vector<double> op_weights_;
    double literal_bias_ = 0.5;
};

bool glue_left(const std::string& t) { return t == ";" || t == "," || t == ")" || t == "]" || t == "[" || t == "++" || t == "--"; }

// Canonical layout: single spaces except around brackets and separators.
std::string render_tokens(const std::vector<Tok>& toks) {
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const Tok& t = toks[i];
        if (i > 0) {
            const Tok& prev = toks[i - 1];
            bool tight = glue_left(t.text) || prev.text == "(" || prev.text == "[" ||
                         (t.text == "(" && prev.kind == Kind::ident) || (t.text == ":" && prev.kind != Kind::punct);
            if (prev.text == "*" && i == 1) tight = true;
            if (!tight) out += ' ';
        }
        out += t.text;
    }
    return out;
}

// Alternative layout: a space between every pair of tokens.
std::string render_loose(const std::vector<Tok>& toks) {
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out += (toks[i].text == ";" ? " " : "  ");
        out += toks[i].text;
    }
    return out;
}

std::vector<Line> flatten(const Function& f) {
    std::vector<Line> lines{f.header};
    for (const Stmt& s : f.body) lines.insert(lines.end(), s.begin(), s.end());
    lines.push_back(f.ret);
    lines.push_back(Line{0, {p("}")}});
    return lines;
}

std::vector<std::string> canonical_lines(const Function& f) {
    std::vector<std::string> out;
    for (const Line& l : flatten(f)) out.push_back(render_tokens(l.toks));
    return out;
}

std::vector<std::string> render_canonical(const Function& f) {
    std::vector<std::string> out;
    for (const Line& l : flatten(f)) out.push_back(std::string(4 * l.depth, ' ') + render_tokens(l.toks));
    return out;
}

const std::vector<std::string> kComments = {"// fast path", "// keep in sync with the caller", "/* edge case */",
                                            "// TODO: revisit bounds", "/* see note above */", "// accumulate"};

std::vector<std::string> render_t1(const Function& f, Generator& g) {
    std::vector<std::string> out;
    bool tabs = g.unit() < 0.5;
    const auto lines = flatten(f);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const Line& l = lines[i];
        std::string indent = tabs ? std::string(l.depth, '\t') : std::string(2 * l.depth, ' ');
        std::string text = g.unit() < 0.5 ? render_loose(l.toks) : render_tokens(l.toks);
        if (i > 0 && i + 1 < lines.size() && g.unit() < 0.3) text += "  " + g.pick(kComments);
        out.push_back(indent + text);
        if (i + 1 < lines.size() - 1 && g.unit() < 0.2) out.push_back("");
        if (i + 1 < lines.size() - 1 && g.unit() < 0.15) out.push_back(indent + g.pick(kComments));
        if (i + 1 < lines.size() - 1 && g.unit() < 0.05) {
            out.push_back(indent + "/* multi-line");
            out.push_back(indent + "   note */");
        }
    }
    return out;
}

Function rename(Function f, Generator& g) {
    std::map<std::string, std::string> names;
    std::set<std::string> taken;
    auto map_tok = [&](Tok& t) {
        if (t.kind == Kind::ident) {
            auto [it, fresh] = names.try_emplace(t.text);
            if (fresh) {
                std::string n;
                do n = "r" + std::to_string(g.uniform(100000)) + "_" + g.pick(kWords);
                while (!taken.insert(n).second);
                it->second = n;
            }
            t.text = it->second;
        } else if (t.kind == Kind::num) {
            t.text = std::to_string(g.uniform(5000) + 1000);
        } else if (t.kind == Kind::str) {
            t.text = "\"" + g.pick(kWords) + "=%ld\\n\"";
        } else if (t.kind == Kind::chr) {
            t.text = "'" + std::string(1, static_cast<char>('A' + g.uniform(26))) + "'";
        }
    };
    for (Tok& t : f.header.toks) map_tok(t);
    for (Stmt& s : f.body)
        for (Line& l : s)
            for (Tok& t : l.toks) map_tok(t);
    for (Tok& t : f.ret.toks) map_tok(t);
    return f;
}

struct Placed {
    std::vector<std::string> lines;
    std::size_t file = 0;
    std::size_t start = 0;
};

}  // namespace

double line_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::vector<std::vector<std::size_t>> dp(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1 : std::max(dp[i - 1][j], dp[i][j - 1]);
    return 2.0 * static_cast<double>(dp[a.size()][b.size()]) / static_cast<double>(a.size() + b.size());
}

PlantedCorpus generate_corpus(const std::filesystem::path& dir, const CorpusSpec& spec) {
    if (spec.t1 + spec.t2 + spec.st3 > spec.base_functions) throw std::invalid_argument("not enough base functions");
    Generator g(spec.seed);
    std::vector<Function> bases;
    for (std::size_t i = 0; i < spec.base_functions; ++i) bases.push_back(g.function());

    std::vector<Placed> placed;
    for (const Function& f : bases) placed.push_back({render_canonical(f), 0, 0});

    struct Plant {
        std::size_t base;
        std::size_t clone;
        CloneType type;
    };
    std::vector<Plant> plants;
    PlantedCorpus corpus;
    std::size_t next_base = 0;
    for (std::size_t i = 0; i < spec.t1; ++i, ++next_base) {
        placed.push_back({render_t1(bases[next_base], g), 0, 0});
        plants.push_back({next_base, placed.size() - 1, CloneType::T1});
    }
    for (std::size_t i = 0; i < spec.t2; ++i, ++next_base) {
        placed.push_back({render_canonical(rename(bases[next_base], g)), 0, 0});
        plants.push_back({next_base, placed.size() - 1, CloneType::T2});
    }
    for (std::size_t i = 0; i < spec.st3; ++i, ++next_base) {
        const Function& base = bases[next_base];
        const auto base_lines = canonical_lines(base);
        g.adopt(base);
        for (int attempt = 0;; ++attempt) {
            if (attempt > 200) throw std::runtime_error("could not build an ST3 variant");
            Function variant = base;
            double sim = 1.0;
            while (sim >= 0.9) {
                std::size_t at = g.uniform(variant.body.size() + 1);
                variant.body.insert(variant.body.begin() + static_cast<std::ptrdiff_t>(at), g.statement(1));
                sim = line_similarity(base_lines, canonical_lines(variant));
            }
            if (classify_type_band(sim) != CloneType::ST3) continue;
            placed.push_back({render_canonical(variant), 0, 0});
            plants.push_back({next_base, placed.size() - 1, CloneType::ST3});
            corpus.st3_line_similarity.push_back(sim);
            break;
        }
    }

    std::vector<std::size_t> order(placed.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), g.rng());

    std::filesystem::create_directories(dir);
    const std::size_t files = (order.size() + spec.functions_per_file - 1) / spec.functions_per_file;
    for (std::size_t fi = 0; fi < files; ++fi) {
        char name[32];
        std::snprintf(name, sizeof name, "unit_%03zu.c", fi);
        std::ofstream out(dir / name);
        out << "#include <stdio.h>\n#include <string.h>\n";
        std::size_t line_no = 2;
        for (std::size_t k = fi * spec.functions_per_file; k < std::min(order.size(), (fi + 1) * spec.functions_per_file); ++k) {
            Placed& pl = placed[order[k]];
            out << "\n";
            ++line_no;
            pl.file = fi;
            pl.start = line_no + 1;
            for (const auto& l : pl.lines) out << l << "\n";
            line_no += pl.lines.size();
        }
    }

    auto coords = [&](const Placed& pl) {
        char name[32];
        std::snprintf(name, sizeof name, "unit_%03zu.c", pl.file);
        return LineRange{name, pl.start, pl.start + pl.lines.size() - 1};
    };
    for (const Plant& plant : plants) {
        corpus.truth.push_back({coords(placed[plant.base]), coords(placed[plant.clone]), plant.type});
    }
    corpus.function_count = placed.size();
    return corpus;
}

}  // namespace sscd::testing
