// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "simuhome/tools/tool_api.hpp"

namespace simuhome::tools {

namespace {

// Splits "PercentSetting" into "percent", "setting"; keeps runs of capitals
// ("RVC", "PM10") together.
void split_identifier(std::string_view word, std::vector<std::string>& out) {
  std::string cur;
  for (std::size_t i = 0; i < word.size(); ++i) {
    const char c = word[i];
    const bool upper = std::isupper(static_cast<unsigned char>(c));
    const bool boundary = upper && !cur.empty() &&
                          (std::islower(static_cast<unsigned char>(word[i - 1])) ||
                           (i + 1 < word.size() && std::islower(static_cast<unsigned char>(word[i + 1]))));
    if (boundary) {
      out.push_back(cur);
      cur.clear();
    }
    cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (!cur.empty()) out.push_back(cur);
}

}  // namespace

std::vector<std::string> DocIndex::tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    std::string lower;
    for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    out.push_back(lower);
    std::vector<std::string> parts;
    split_identifier(word, parts);
    if (parts.size() > 1) out.insert(out.end(), parts.begin(), parts.end());
    word.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      word.push_back(c);
    else
      flush();
  }
  flush();
  return out;
}

DocIndex::DocIndex(const matter::ClusterRegistry& registry) {
  for (const auto& c : registry.clusters()) {
    std::string text = c.doc_text;
    passages_.push_back({c.id, 0, text});
    std::string indexed = c.id + " " + c.display_name + " " + text;
    for (const auto& a : c.attributes) indexed += " " + a.name;
    for (const auto& k : c.commands) indexed += " " + k.name;
    auto toks = tokenize(indexed);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    tokens_.push_back(std::move(toks));
  }
  std::map<std::string, int, std::less<>> df;
  for (const auto& toks : tokens_)
    for (const auto& t : toks) ++df[t];
  const double n = static_cast<double>(passages_.size());
  for (const auto& [t, k] : df) idf_[t] = std::log((n + 1.0) / (k + 1.0)) + 1.0;
}

std::shared_ptr<const DocIndex> DocIndex::builtin() {
  static const auto index = std::make_shared<const DocIndex>(*matter::ClusterRegistry::builtin());
  return index;
}

double DocIndex::score(std::string_view query, std::size_t passage) const {
  auto q = tokenize(query);
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  const auto& toks = tokens_.at(passage);
  double s = 0;
  for (const auto& t : q)
    if (std::binary_search(toks.begin(), toks.end(), t)) s += idf_.find(t)->second;
  return s;
}

std::vector<DocHit> DocIndex::search(std::string_view query, std::size_t top_k) const {
  if (tokenize(query).empty()) return {};
  std::vector<DocHit> hits;
  for (std::size_t i = 0; i < passages_.size(); ++i) {
    auto h = passages_[i];
    h.score = score(query, i);
    hits.push_back(std::move(h));
  }
  std::stable_sort(hits.begin(), hits.end(), [](const DocHit& a, const DocHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.cluster_id < b.cluster_id;
  });
  if (hits.size() > top_k) hits.resize(top_k);
  return hits;
}

}  // namespace simuhome::tools
