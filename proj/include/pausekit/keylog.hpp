#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pausekit {

enum class KeyClass { Alnum, Sep, Edit };

const char* to_string(KeyClass c);

// One timestamped keystroke. `key` is either a single code point (UTF-8)
// or an angle-bracket token such as "<SPACE>" or "<BACK>".
struct KeyEvent {
  std::int64_t time_ms = 0;  // milliseconds from session start, non-negative
  std::string key;
  KeyClass key_class = KeyClass::Sep;
};

struct Session {
  std::string id;
  std::optional<std::string> language_pair;  // e.g. "en→da"
  std::vector<KeyEvent> events;              // ordered by time_ms, non-decreasing
};

// Key classification settings. The edit set can be extended with custom
// angle tokens; single alphanumeric code points always classify as Alnum
// regardless of the edit set.
struct ClassifyConfig {
  std::set<std::string> edit_tokens = {"<BACK>", "<DEL>", "<NAV>"};
  bool drop_edits = false;  // drop Edit events at ingestion
};

// Loads a classification config from key-value text:
//   edit_tokens = <BACK>,<DEL>,<NAV>
//   drop_edits = false
// '#' starts a comment; unknown keys are rejected.
ClassifyConfig parse_classify_config(std::string_view text);
ClassifyConfig load_classify_config(const std::string& path);

// Total over non-empty tokens: Alnum for a single code point with the
// alphanumeric property (combining marks attach to their base), Edit for
// configured edit tokens, Sep otherwise.
KeyClass classify_key(const std::string& key, const ClassifyConfig& config = {});

// True if the code point is a letter or decimal digit.
bool is_alnum_codepoint(char32_t cp);

enum class IssueCode {
  NonMonotonicTime,   // error
  TooFewEvents,       // error
  UnknownKeyToken,    // warning
  DuplicateTimestamp  // warning
};

const char* to_string(IssueCode c);
bool is_error(IssueCode c);

struct ValidationIssue {
  IssueCode code;
  std::size_t event_index = 0;
  std::string detail;
};

struct ValidationReport {
  std::string session_id;
  bool ok = true;  // true iff no error-severity issue
  std::vector<ValidationIssue> issues;
};

enum class LogFormat { CanonicalCsv };

// Parses the canonical CSV format (header `session_id,time_ms,key`) into
// one Session per distinct session_id, events in file order. An empty
// document yields an empty list. Malformed rows throw ParseError with the
// line number.
std::vector<Session> parse_keystroke_log(std::string_view text,
                                         LogFormat format = LogFormat::CanonicalCsv,
                                         const ClassifyConfig& config = {});

// Inverse of parse_keystroke_log for the canonical format.
std::string serialize_sessions(const std::vector<Session>& sessions);

// Never throws; reports every violated invariant with its event index.
ValidationReport validate_session(const Session& session,
                                  const ClassifyConfig& config = {});

}  // namespace pausekit
