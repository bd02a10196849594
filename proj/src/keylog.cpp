#include "pausekit/keylog.hpp"

#include <algorithm>
#include <unordered_map>

#include "pausekit/csv.hpp"
#include "pausekit/errors.hpp"

namespace pausekit {

namespace {

struct CpRange {
  char32_t lo, hi;
};

// Letter and decimal-digit ranges: the principal letter/digit blocks of the
// BMP plus the supplementary CJK planes. Not a full Unicode property table,
// but wide enough to class Latin, Greek, Cyrillic, Semitic, Indic, SE-Asian,
// Georgian, Hangul, kana and CJK keystrokes correctly. Sorted for binary
// search.
constexpr CpRange kAlnumRanges[] = {
    {0x0030, 0x0039}, {0x0041, 0x005A}, {0x0061, 0x007A},
    {0x00AA, 0x00AA}, {0x00B5, 0x00B5}, {0x00BA, 0x00BA},
    {0x00C0, 0x00D6}, {0x00D8, 0x00F6}, {0x00F8, 0x02C1},
    {0x0370, 0x0374}, {0x0376, 0x0377}, {0x037A, 0x037D}, {0x037F, 0x037F},
    {0x0386, 0x0386}, {0x0388, 0x03F5}, {0x03F7, 0x0481},
    {0x048A, 0x052F}, {0x0531, 0x0556}, {0x0561, 0x0587},
    {0x05D0, 0x05EA}, {0x05EF, 0x05F2},
    {0x0620, 0x064A}, {0x0660, 0x0669}, {0x066E, 0x066F},
    {0x0671, 0x06D3}, {0x06D5, 0x06D5}, {0x06E5, 0x06E6}, {0x06EE, 0x06FF},
    {0x0710, 0x072F}, {0x074D, 0x07A5}, {0x07C0, 0x07EA},
    {0x0904, 0x0939}, {0x093D, 0x093D}, {0x0950, 0x0950},
    {0x0958, 0x0961}, {0x0966, 0x096F}, {0x0971, 0x097F},
    {0x0985, 0x09B9}, {0x09CE, 0x09CE}, {0x09DC, 0x09E1}, {0x09E6, 0x09F1},
    {0x0A05, 0x0A39}, {0x0A59, 0x0A5E}, {0x0A66, 0x0A6F}, {0x0A72, 0x0A74},
    {0x0A85, 0x0AB9}, {0x0ABD, 0x0ABD}, {0x0AE0, 0x0AE1}, {0x0AE6, 0x0AEF},
    {0x0B05, 0x0B39}, {0x0B3D, 0x0B3D}, {0x0B5C, 0x0B61}, {0x0B66, 0x0B6F},
    {0x0B71, 0x0B71}, {0x0B85, 0x0BB9}, {0x0BE6, 0x0BEF},
    {0x0C05, 0x0C39}, {0x0C58, 0x0C61}, {0x0C66, 0x0C6F},
    {0x0C85, 0x0CB9}, {0x0CDE, 0x0CE1}, {0x0CE6, 0x0CEF},
    {0x0D05, 0x0D39}, {0x0D60, 0x0D61}, {0x0D66, 0x0D6F}, {0x0D7A, 0x0D7F},
    {0x0D85, 0x0DC6},
    {0x0E01, 0x0E30}, {0x0E32, 0x0E33}, {0x0E40, 0x0E46}, {0x0E50, 0x0E59},
    {0x0E81, 0x0EB0}, {0x0EB2, 0x0EB3}, {0x0EBD, 0x0EC4}, {0x0EC6, 0x0EC6},
    {0x0ED0, 0x0ED9},
    {0x0F00, 0x0F00}, {0x0F20, 0x0F29}, {0x0F40, 0x0F6C},
    {0x1000, 0x102A}, {0x103F, 0x1049}, {0x1050, 0x1055},
    {0x10A0, 0x10C5}, {0x10D0, 0x10FA}, {0x10FC, 0x10FC},
    {0x1100, 0x11FF}, {0x1200, 0x135A},
    {0x13A0, 0x13F5}, {0x1401, 0x166C}, {0x16A0, 0x16EA},
    {0x1780, 0x17B3}, {0x17E0, 0x17E9},
    {0x1810, 0x1819}, {0x1820, 0x18A8},
    {0x1E00, 0x1F15}, {0x1F18, 0x1F1D}, {0x1F20, 0x1F45}, {0x1F48, 0x1F4D},
    {0x1F50, 0x1F7D}, {0x1F80, 0x1FB4}, {0x1FB6, 0x1FBC}, {0x1FBE, 0x1FBE},
    {0x1FC2, 0x1FCC}, {0x1FD0, 0x1FDB}, {0x1FE0, 0x1FEC}, {0x1FF2, 0x1FFC},
    {0x2071, 0x2071}, {0x207F, 0x207F}, {0x2090, 0x209C},
    {0x2C60, 0x2C7F}, {0x2D00, 0x2D25},
    {0x3005, 0x3007}, {0x3041, 0x3096}, {0x309D, 0x309F},
    {0x30A1, 0x30FA}, {0x30FC, 0x30FF}, {0x3105, 0x312F}, {0x3131, 0x318E},
    {0x31A0, 0x31BF}, {0x31F0, 0x31FF},
    {0x3400, 0x4DBF}, {0x4E00, 0x9FFF},
    {0xA000, 0xA48C}, {0xAC00, 0xD7A3},
    {0xF900, 0xFAD9},
    {0xFB00, 0xFB06}, {0xFB13, 0xFB17}, {0xFB1F, 0xFB28}, {0xFB2A, 0xFB4E},
    {0xFE70, 0xFEFC},
    {0xFF10, 0xFF19}, {0xFF21, 0xFF3A}, {0xFF41, 0xFF5A},
    {0xFF66, 0xFF9D}, {0xFFA0, 0xFFDC},
    {0x20000, 0x2A6DF}, {0x2A700, 0x2EBEF}, {0x2F800, 0x2FA1F},
};

// Generic combining-diacritic blocks, stripped before classification so a
// decomposed "e" + U+0301 keystroke classes by its base letter.
constexpr CpRange kCombiningRanges[] = {
    {0x0300, 0x036F}, {0x0483, 0x0489},
    {0x0591, 0x05BD}, {0x05BF, 0x05BF}, {0x05C1, 0x05C2}, {0x05C4, 0x05C5},
    {0x05C7, 0x05C7},
    {0x0610, 0x061A}, {0x064B, 0x065F}, {0x0670, 0x0670},
    {0x06D6, 0x06DC}, {0x06DF, 0x06E4}, {0x06E7, 0x06E8}, {0x06EA, 0x06ED},
    {0x0951, 0x0957},
    {0x1AB0, 0x1AFF}, {0x1DC0, 0x1DFF}, {0x20D0, 0x20FF}, {0xFE20, 0xFE2F},
};

bool in_ranges(char32_t cp, const CpRange* ranges, std::size_t n) {
  std::size_t lo = 0, hi = n;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cp < ranges[mid].lo) hi = mid;
    else if (cp > ranges[mid].hi) lo = mid + 1;
    else return true;
  }
  return false;
}

bool is_combining(char32_t cp) {
  return in_ranges(cp, kCombiningRanges, std::size(kCombiningRanges));
}

// Minimal UTF-8 decoder; returns false on malformed input.
bool decode_utf8(std::string_view s, std::vector<char32_t>& out) {
  out.clear();
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (c < 0x80) {
      cp = c;
      len = 1;
    } else if ((c & 0xE0) == 0xC0) {
      cp = c & 0x1F;
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      cp = c & 0x0F;
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      cp = c & 0x07;
      len = 4;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t j = 1; j < len; ++j) {
      const unsigned char cc = static_cast<unsigned char>(s[i + j]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return true;
}

const std::set<std::string>& builtin_tokens() {
  static const std::set<std::string> tokens = {"<SPACE>", "<RET>", "<TAB>",
                                               "<BACK>",  "<DEL>", "<NAV>"};
  return tokens;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

const char* to_string(KeyClass c) {
  switch (c) {
    case KeyClass::Alnum: return "ALNUM";
    case KeyClass::Sep: return "SEP";
    case KeyClass::Edit: return "EDIT";
  }
  return "?";
}

const char* to_string(IssueCode c) {
  switch (c) {
    case IssueCode::NonMonotonicTime: return "NON_MONOTONIC_TIME";
    case IssueCode::TooFewEvents: return "TOO_FEW_EVENTS";
    case IssueCode::UnknownKeyToken: return "UNKNOWN_KEY_TOKEN";
    case IssueCode::DuplicateTimestamp: return "DUPLICATE_TIMESTAMP";
  }
  return "?";
}

bool is_error(IssueCode c) {
  return c == IssueCode::NonMonotonicTime || c == IssueCode::TooFewEvents;
}

bool is_alnum_codepoint(char32_t cp) {
  return in_ranges(cp, kAlnumRanges, std::size(kAlnumRanges));
}

KeyClass classify_key(const std::string& key, const ClassifyConfig& config) {
  if (key.empty()) throw ArgumentError("classify_key: empty key token");
  std::vector<char32_t> cps;
  if (decode_utf8(key, cps) && !cps.empty()) {
    // Strip trailing combining marks so the base code point decides.
    while (cps.size() > 1 && is_combining(cps.back())) cps.pop_back();
    if (cps.size() == 1 && is_alnum_codepoint(cps[0])) return KeyClass::Alnum;
  }
  if (config.edit_tokens.count(key)) return KeyClass::Edit;
  return KeyClass::Sep;
}

ClassifyConfig parse_classify_config(std::string_view text) {
  ClassifyConfig cfg;
  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') {
      if (nl == text.size()) break;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ArgumentError("classification config line " + std::to_string(line_no) +
                          ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "edit_tokens") {
      cfg.edit_tokens.clear();
      std::size_t p = 0;
      while (p <= value.size()) {
        std::size_t c = value.find(',', p);
        if (c == std::string::npos) c = value.size();
        const std::string tok = trim(std::string_view(value).substr(p, c - p));
        if (!tok.empty()) cfg.edit_tokens.insert(tok);
        if (c == value.size()) break;
        p = c + 1;
      }
    } else if (key == "drop_edits") {
      if (value == "true" || value == "1") cfg.drop_edits = true;
      else if (value == "false" || value == "0") cfg.drop_edits = false;
      else throw ArgumentError("classification config: drop_edits must be true or false");
    } else {
      throw ArgumentError("classification config: unknown key '" + key + "'");
    }
    if (nl == text.size()) break;
  }
  return cfg;
}

ClassifyConfig load_classify_config(const std::string& path) {
  return parse_classify_config(io::read_file(path));
}

std::vector<Session> parse_keystroke_log(std::string_view text, LogFormat format,
                                         const ClassifyConfig& config) {
  (void)format;  // CanonicalCsv is the only format; adapters plug in here
  const auto rows = csv::parse(text);
  if (rows.empty()) return {};

  const auto& header = rows[0].fields;
  if (header.size() != 3 || header[0] != "session_id" || header[1] != "time_ms" ||
      header[2] != "key") {
    throw ParseError(rows[0].line, "expected header 'session_id,time_ms,key'");
  }

  std::vector<Session> sessions;
  std::unordered_map<std::string, std::size_t> index_by_id;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 3)
      throw ParseError(row.line, "expected 3 fields, got " +
                                     std::to_string(row.fields.size()));
    const std::string& id = row.fields[0];
    if (id.empty()) throw ParseError(row.line, "empty session_id");
    std::uint64_t t = 0;
    if (!csv::parse_u64(row.fields[1], t) || t > static_cast<std::uint64_t>(INT64_MAX))
      throw ParseError(row.line, "time_ms is not a non-negative integer: '" +
                                     row.fields[1] + "'");
    const std::string& key = row.fields[2];
    if (key.empty()) throw ParseError(row.line, "empty key");

    const KeyClass kc = classify_key(key, config);
    if (config.drop_edits && kc == KeyClass::Edit) continue;

    auto it = index_by_id.find(id);
    if (it == index_by_id.end()) {
      it = index_by_id.emplace(id, sessions.size()).first;
      sessions.push_back(Session{id, std::nullopt, {}});
    }
    sessions[it->second].events.push_back(
        KeyEvent{static_cast<std::int64_t>(t), key, kc});
  }
  return sessions;
}

std::string serialize_sessions(const std::vector<Session>& sessions) {
  std::string out = "session_id,time_ms,key\n";
  for (const auto& s : sessions) {
    for (const auto& e : s.events) {
      out += csv::join_row({s.id, std::to_string(e.time_ms), e.key});
      out += '\n';
    }
  }
  return out;
}

ValidationReport validate_session(const Session& session, const ClassifyConfig& config) {
  ValidationReport report;
  report.session_id = session.id;

  if (session.events.size() < 2) {
    report.issues.push_back(
        {IssueCode::TooFewEvents, 0,
         "session has " + std::to_string(session.events.size()) + " event(s)"});
  }
  for (std::size_t i = 0; i < session.events.size(); ++i) {
    const auto& e = session.events[i];
    if (i > 0) {
      const std::int64_t prev = session.events[i - 1].time_ms;
      if (e.time_ms < prev) {
        report.issues.push_back({IssueCode::NonMonotonicTime, i,
                                 "time goes backwards: " + std::to_string(prev) +
                                     " -> " + std::to_string(e.time_ms)});
      } else if (e.time_ms == prev) {
        report.issues.push_back({IssueCode::DuplicateTimestamp, i,
                                 "same timestamp as previous event: " +
                                     std::to_string(e.time_ms)});
      }
    }
    // A key that is neither a decodable code-point sequence nor a known token.
    std::vector<char32_t> cps;
    const bool decodes = decode_utf8(e.key, cps) && !cps.empty();
    bool single_cp = false;
    if (decodes) {
      auto tmp = cps;
      while (tmp.size() > 1 && is_combining(tmp.back())) tmp.pop_back();
      single_cp = tmp.size() == 1;
    }
    if (!single_cp && !builtin_tokens().count(e.key) && !config.edit_tokens.count(e.key)) {
      report.issues.push_back(
          {IssueCode::UnknownKeyToken, i, "unrecognized key token '" + e.key + "'"});
    }
  }
  report.ok = std::none_of(report.issues.begin(), report.issues.end(),
                           [](const ValidationIssue& v) { return is_error(v.code); });
  return report;
}

}  // namespace pausekit
