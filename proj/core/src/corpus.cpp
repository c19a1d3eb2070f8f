#include "semboot/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace semboot {

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& ex : examples) n += ex.tokens.size();
  return n;
}

std::size_t Corpus::type_count() const {
  std::set<std::string> types;
  for (const auto& ex : examples) types.insert(ex.tokens.begin(), ex.tokens.end());
  return types.size();
}

std::size_t split_point_for(std::size_t n, double test_frac) {
  if (test_frac < 0.0 || test_frac > 1.0) throw std::invalid_argument("test fraction must lie in [0, 1]");
  auto held = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_frac));
  return n - std::min(held, n);
}

void Corpus::set_test_fraction(double frac) { split_point = split_point_for(examples.size(), frac); }

std::vector<std::string> tokenize(std::string_view utterance) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < utterance.size()) {
    while (pos < utterance.size() && std::isspace(static_cast<unsigned char>(utterance[pos]))) ++pos;
    std::size_t start = pos;
    while (pos < utterance.size() && !std::isspace(static_cast<unsigned char>(utterance[pos]))) ++pos;
    if (pos > start) out.emplace_back(utterance.substr(start, pos - start));
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Corpus parse_corpus(std::istream& in, double test_frac) {
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      corpus.diagnostics.push_back({lineno, "missing TAB between utterance and logical form"});
      continue;
    }
    std::string text = trim(std::string_view(line).substr(0, tab));
    auto tokens = tokenize(text);
    if (tokens.empty()) {
      corpus.diagnostics.push_back({lineno, "empty utterance"});
      continue;
    }
    try {
      Term lf = parse_lf(std::string_view(line).substr(tab + 1));
      sem_type_of(lf);
      corpus.examples.push_back(Example{corpus.examples.size(), std::move(tokens), std::move(lf), std::move(text)});
    } catch (const std::exception& e) {
      corpus.diagnostics.push_back({lineno, e.what()});
    }
  }
  corpus.set_test_fraction(test_frac);
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, double test_frac) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot read corpus file " + path.string());
  Corpus c = parse_corpus(in, test_frac);
  if (c.examples.empty()) throw CorpusError("corpus " + path.string() + " contains no usable examples");
  return c;
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& ex : corpus.examples) {
    for (std::size_t k = 0; k < ex.tokens.size(); ++k) {
      if (k) out += ' ';
      out += ex.tokens[k];
    }
    out += '\t';
    out += render_lf(ex.lf);
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, const std::string& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write corpus file " + path.string());
  if (!header.empty()) out << "# " << header << '\n';
  out << serialize_corpus(corpus);
  if (!out) throw CorpusError("failed writing corpus file " + path.string());
}

std::vector<Term> distractors_for(const Corpus& corpus, std::size_t index, std::size_t n) {
  std::vector<Term> out;
  if (n == 0 || index >= corpus.size()) return out;
  const Term& gold = corpus.examples[index].lf;
  std::vector<Term> before;  // nearest first
  std::vector<Term> after;
  for (std::size_t k = index; k-- > 0;) {
    if (!alpha_equal(corpus.examples[k].lf, gold)) before.push_back(corpus.examples[k].lf);
  }
  for (std::size_t k = index + 1; k < corpus.size(); ++k) {
    if (!alpha_equal(corpus.examples[k].lf, gold)) after.push_back(corpus.examples[k].lf);
  }
  std::size_t want_before = n / 2;
  std::size_t want_after = n - want_before;
  std::size_t take_before = std::min(want_before, before.size());
  std::size_t take_after = std::min(want_after, after.size());
  if (take_before < want_before) take_after = std::min(after.size(), take_after + (want_before - take_before));
  if (take_after < want_after) take_before = std::min(before.size(), take_before + (want_after - take_after));
  for (std::size_t k = take_before; k-- > 0;) out.push_back(before[k]);
  for (std::size_t k = 0; k < take_after; ++k) out.push_back(after[k]);
  return out;
}

// ---------------------------------------------------------------------------

std::string_view word_order_name(WordOrder o) {
  switch (o) {
    case WordOrder::SVO: return "SVO";
    case WordOrder::SOV: return "SOV";
    case WordOrder::VSO: return "VSO";
    case WordOrder::VOS: return "VOS";
    case WordOrder::OVS: return "OVS";
    case WordOrder::OSV: return "OSV";
  }
  return "?";
}

WordOrder parse_word_order(std::string_view name) {
  std::string up(name);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (WordOrder o : kAllOrders) {
    if (word_order_name(o) == up) return o;
  }
  throw std::invalid_argument("unknown word order '" + std::string(name) + "'");
}

namespace {

struct Vocab {
  std::vector<std::pair<std::string, std::string>> entities;  // word, constant
  std::vector<std::string> nouns;
  std::vector<std::string> trans;
  std::vector<std::string> intrans;
  std::vector<std::string> modals;
};

const std::vector<std::pair<std::string, std::string>> kEntityPool = {
    {"you", "pro:per|you"},     {"adam", "n:prop|adam"},   {"mommy", "n:prop|mommy"}, {"daddy", "n:prop|daddy"},
    {"it", "pro:per|it"},       {"robin", "n:prop|robin"}, {"paul", "n:prop|paul"},   {"ursula", "n:prop|ursula"},
    {"cromer", "n:prop|cromer"}, {"joshua", "n:prop|joshua"},
};
const std::vector<std::string> kNounPool = {"ball", "shoe", "dog", "cat",  "book",  "cup",  "truck",
                                            "hat",  "box",  "car", "bird", "spoon", "sock", "block"};
const std::vector<std::string> kTransPool = {"lost", "see", "want", "take", "like", "push",
                                             "find", "hold", "bring", "drop", "kick", "open"};
const std::vector<std::string> kIntransPool = {"run", "sleep", "jump", "fall", "sing", "cry", "swim", "laugh"};
const std::vector<std::string> kModalPool = {"can", "will", "should", "must", "might"};

template <typename T>
std::vector<T> take(const std::vector<T>& pool, std::size_t n, const char* what) {
  if (n == 0 || n > pool.size())
    throw std::invalid_argument(std::string("synthetic vocabulary size for ") + what + " must be in [1, " +
                                std::to_string(pool.size()) + "]");
  return std::vector<T>(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
}

Vocab make_vocab(const SynthConfig& cfg) {
  Vocab v;
  v.entities = take(kEntityPool, cfg.n_entities, "entities");
  v.nouns = take(kNounPool, cfg.n_nouns, "nouns");
  v.trans = take(kTransPool, cfg.n_trans_verbs, "transitive verbs");
  v.intrans = take(kIntransPool, cfg.n_intrans_verbs, "intransitive verbs");
  v.modals = take(kModalPool, cfg.n_modals, "modals");
  return v;
}

struct Phrase {
  std::vector<std::string> words;
  std::string lf;
};

// Orders as positions of S, V and O.
std::vector<char> slot_order(WordOrder o) {
  std::string name(word_order_name(o));
  return std::vector<char>(name.begin(), name.end());
}

}  // namespace

Corpus generate_synthetic(const SynthConfig& cfg, double test_frac) {
  if (cfg.size == 0) throw std::invalid_argument("synthetic corpus size must be at least 1");
  Vocab v = make_vocab(cfg);
  std::mt19937_64 rng(cfg.seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  auto entity = [&]() {
    const auto& e = v.entities[pick(v.entities.size())];
    return Phrase{{e.first}, e.second};
  };
  auto object = [&]() {
    if (pick(2) == 0) return entity();
    const auto& n = v.nouns[pick(v.nouns.size())];
    return Phrase{{"a", n}, "(det:art|a n|" + n + ")"};
  };

  Corpus corpus;
  const auto order = slot_order(cfg.order);
  for (std::size_t idx = 0; idx < cfg.size; ++idx) {
    std::size_t kind = pick(100);
    Phrase subj = entity();
    std::vector<std::string> tokens;
    std::string lf;
    auto linearize = [&](const std::vector<std::string>& vgroup, const Phrase* obj, std::vector<std::string>& out) {
      for (char slot : order) {
        if (slot == 'S') out.insert(out.end(), subj.words.begin(), subj.words.end());
        if (slot == 'V') out.insert(out.end(), vgroup.begin(), vgroup.end());
        if (slot == 'O' && obj) out.insert(out.end(), obj->words.begin(), obj->words.end());
      }
    };
    if (kind < 15) {
      const auto& verb = v.intrans[pick(v.intrans.size())];
      lf = "(v|" + verb + " " + subj.lf + ")";
      linearize({verb}, nullptr, tokens);
    } else if (kind < 50) {
      const auto& verb = v.trans[pick(v.trans.size())];
      Phrase obj = object();
      lf = "(v|" + verb + " " + obj.lf + " " + subj.lf + ")";
      linearize({verb}, &obj, tokens);
    } else if (kind < 65) {
      const auto& modal = v.modals[pick(v.modals.size())];
      const auto& verb = v.trans[pick(v.trans.size())];
      Phrase obj = object();
      lf = "(mod|" + modal + " (v|" + verb + " " + obj.lf + " " + subj.lf + "))";
      linearize({modal, verb}, &obj, tokens);
    } else if (kind < 75) {
      const auto& modal = v.modals[pick(v.modals.size())];
      const auto& verb = v.trans[pick(v.trans.size())];
      Phrase obj = object();
      lf = "(neg|not (mod|" + modal + " (v|" + verb + " " + obj.lf + " " + subj.lf + ")))";
      linearize({modal, "not", verb}, &obj, tokens);
    } else if (kind < 90) {
      const auto& modal = v.modals[pick(v.modals.size())];
      const auto& verb = v.trans[pick(v.trans.size())];
      Phrase obj = object();
      lf = "(Q|Q (mod|" + modal + " (v|" + verb + " " + obj.lf + " " + subj.lf + ")))";
      tokens.push_back(modal);
      linearize({verb}, &obj, tokens);
    } else {
      const auto& modal = v.modals[pick(v.modals.size())];
      const auto& verb = v.trans[pick(v.trans.size())];
      lf = "(Q|Q (mod|" + modal + " (v|" + verb + " pro:int|WHAT " + subj.lf + ")))";
      tokens.push_back("what");
      tokens.push_back(modal);
      linearize({verb}, nullptr, tokens);
    }
    std::string text;
    for (std::size_t k = 0; k < tokens.size(); ++k) text += (k ? " " : "") + tokens[k];
    corpus.examples.push_back(Example{idx, std::move(tokens), parse_lf(lf), std::move(text)});
  }
  corpus.set_test_fraction(test_frac);
  return corpus;
}

// ---------------------------------------------------------------------------

namespace {

std::string normalize_lexicon_text(std::string s) {
  auto replace_all = [&](const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  replace_all("$\\lambda$", "lam ");
  replace_all("\xce\xbb", "lam ");  // UTF-8 lambda
  replace_all("\\\\", "\\");
  replace_all("~", "");
  return s;
}

void parse_entries(const std::string& word, const std::string& text, GoldLexicon& lex, std::size_t lineno) {
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string entry = trim(std::string_view(text).substr(pos, comma == std::string::npos ? std::string::npos
                                                                                              : comma - pos));
    pos = comma == std::string::npos ? text.size() + 1 : comma + 1;
    if (entry.empty()) continue;
    auto bars = entry.find("||");
    if (bars == std::string::npos)
      throw CorpusError("line " + std::to_string(lineno) + ": lexical entry lacks '||'");
    Term lf = parse_lf(trim(std::string_view(entry).substr(0, bars)));
    Category cat = parse_category(trim(std::string_view(entry).substr(bars + 2)));
    lex[word].push_back(LexicalEntry{std::move(lf), std::move(cat)});
  }
}

}  // namespace

GoldLexicon parse_gold_lexicon(std::istream& in) {
  GoldLexicon lex;
  std::string line;
  std::string current;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    line = normalize_lexicon_text(line);
    try {
      if (std::isspace(static_cast<unsigned char>(line[0]))) {
        if (current.empty()) throw CorpusError("continuation line without a word");
        parse_entries(current, trim(line), lex, lineno);
        continue;
      }
      auto colon = line.find(':');
      if (colon == std::string::npos || colon == 0) throw CorpusError("expected 'word: entries'");
      current = trim(std::string_view(line).substr(0, colon));
      parse_entries(current, line.substr(colon + 1), lex, lineno);
    } catch (const CorpusError&) {
      throw;
    } catch (const std::exception& e) {
      throw CorpusError("gold lexicon line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return lex;
}

GoldLexicon load_gold_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot read gold lexicon " + path.string());
  return parse_gold_lexicon(in);
}

std::string serialize_gold_lexicon(const GoldLexicon& lex) {
  std::string out;
  for (const auto& [word, entries] : lex) {
    out += word + ":";
    for (std::size_t k = 0; k < entries.size(); ++k) {
      out += (k ? ", " : " ") + render_lf(entries[k].lf) + " || " + entries[k].category.str();
    }
    out += '\n';
  }
  return out;
}

GoldLexicon synthetic_gold_lexicon(const SynthConfig& cfg) {
  Vocab v = make_vocab(cfg);
  GoldLexicon lex;
  auto add = [&](const std::string& w, const std::string& lf, const std::string& cat) {
    lex[w].push_back(LexicalEntry{parse_lf(lf), parse_category(cat)});
  };
  for (const auto& [w, c] : v.entities) add(w, c, "NP");
  for (const auto& n : v.nouns) add(n, "n|" + n, "N");
  add("a", "lam x.(det:art|a x)", "NP/N");

  // Object-inner verbs take the object first; subject-inner ones the subject.
  std::string cat;
  bool object_inner = true;
  switch (cfg.order) {
    case WordOrder::SVO: cat = "S\\NP/NP"; break;
    case WordOrder::SOV: cat = "S\\NP\\NP"; break;
    case WordOrder::VSO: cat = "S/NP/NP"; object_inner = false; break;
    case WordOrder::VOS: cat = "S/NP/NP"; break;
    case WordOrder::OVS: cat = "S/NP\\NP"; break;
    case WordOrder::OSV: cat = "S\\NP\\NP"; object_inner = false; break;
  }
  for (const auto& verb : v.trans) {
    add(verb, object_inner ? "lam x.lam y.(v|" + verb + " x y)" : "lam x.lam y.(v|" + verb + " y x)", cat);
  }
  auto order = slot_order(cfg.order);
  bool subject_first = std::find(order.begin(), order.end(), 'S') < std::find(order.begin(), order.end(), 'V');
  for (const auto& verb : v.intrans) add(verb, "lam x.(v|" + verb + " x)", subject_first ? "S\\NP" : "S/NP");
  return lex;
}

GoldLexicon default_wh_gold() {
  GoldLexicon lex;
  lex["what"].push_back(LexicalEntry{parse_lf("lam p.(p pro:int|WHAT)"), parse_category("Swhq/(Sq/NP)")});
  lex["who"].push_back(LexicalEntry{parse_lf("lam p.(p pro:int|WHO)"), parse_category("Swhq/(Sq/NP)")});
  return lex;
}

}  // namespace semboot
