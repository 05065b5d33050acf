// SPDX-License-Identifier: Apache-2.0
#include "internal.hpp"
#include "simuhome/common/error.hpp"
#include "simuhome/episodes/generator.hpp"

namespace simuhome::episodes {

namespace {

const char* kRewritePrompt =
    "You rewrite requests that a resident gives to a smart-home assistant. Rewrite the request below so it sounds "
    "like a person talking. Keep every room name, device name, number and clock time exactly as written, keep every "
    "instruction and question, and do not add new ones. Reply with the rewritten request only.";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n\"");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n\"") - b + 1);
}

}  // namespace

std::string ChatQueryWriter::write(const Episode& ep) {
  json messages = json::array({{{"role", "system"}, {"content", kRewritePrompt}}, {{"role", "user"}, {"content", ep.query}}});
  return chat_complete(cfg_, messages);
}

bool query_mentions_subjects(const Episode& ep, const std::string& text) {
  const auto hay = detail::lower(text);
  for (const auto& s : ep.goal.subjects)
    if (hay.find(detail::lower(s)) == std::string::npos) return false;
  return true;
}

QueryResult synthesize_query(const Episode& ep, QueryWriter* writer, int retries) {
  if (writer) {
    for (int i = 0; i <= retries; ++i) {
      std::string text;
      try {
        text = trim(writer->write(ep));
      } catch (const Error&) {
        continue;
      }
      if (!text.empty() && query_mentions_subjects(ep, text)) return {text, "llm"};
    }
  }
  return {ep.query, "template"};
}

}  // namespace simuhome::episodes
