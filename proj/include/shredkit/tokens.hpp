#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace shredkit {

// DadaGP timing resolution.
inline constexpr int kTicksPerQuarter = 960;

namespace tok {

struct Artist {
  std::string name;
  bool operator==(const Artist&) const = default;
};
struct Downtune {
  int semitones = 0;
  bool operator==(const Downtune&) const = default;
};
struct Tempo {
  int bpm = 120;
  bool operator==(const Tempo&) const = default;
};
struct Start {
  bool operator==(const Start&) const = default;
};
struct End {
  bool operator==(const End&) const = default;
};
struct NewMeasure {
  bool operator==(const NewMeasure&) const = default;
};
struct Note {
  std::string instrument;
  int string_num = 1;
  int fret = 0;
  bool operator==(const Note&) const = default;
};
struct Drums {
  std::string note_type;
  bool operator==(const Drums&) const = default;
};
struct Wait {
  int ticks = 0;
  bool operator==(const Wait&) const = default;
};
struct NoteEffect {
  std::string effect;
  std::vector<std::string> params;
  bool operator==(const NoteEffect&) const = default;
};
struct BeatEffect {
  std::string effect;
  std::vector<std::string> params;
  bool operator==(const BeatEffect&) const = default;
};
struct Unknown {
  std::string raw;
  bool operator==(const Unknown&) const = default;
};

}  // namespace tok

using Token = std::variant<tok::Artist, tok::Downtune, tok::Tempo, tok::Start, tok::End,
                           tok::Note, tok::Drums, tok::Wait, tok::NoteEffect, tok::BeatEffect,
                           tok::NewMeasure, tok::Unknown>;

template <typename T>
bool is(const Token& t) {
  return std::holds_alternative<T>(t);
}

inline bool is_note_like(const Token& t) { return is<tok::Note>(t) || is<tok::Drums>(t); }
inline bool is_effect(const Token& t) { return is<tok::NoteEffect>(t) || is<tok::BeatEffect>(t); }

// Short lowercase name of the variant ("note", "wait", ...).
std::string_view kind_name(const Token& t);

// Total: every whitespace-free word maps to exactly one variant. Words that
// match no known spelling (including non-canonical integers such as "wait:007")
// become Unknown with the text preserved, so to_text(parse_token(w)) == w.
Token parse_token(std::string_view word);
std::string to_text(const Token& t);

struct Header {
  std::optional<std::string> artist;
  std::optional<int> downtune;
  std::optional<int> tempo;

  int downtune_or_default() const { return downtune.value_or(0); }
  int tempo_or_default() const { return tempo.value_or(120); }
  bool operator==(const Header&) const = default;
};

struct TokenStream {
  Header header;
  // Non-header tokens that appeared before start (always a violation).
  std::vector<Token> prelude;
  std::vector<Token> body;
  bool has_start = true;
  bool has_end = true;
  // Parser notes such as ignored trailing tokens. Not part of equality.
  std::vector<std::string> warnings;

  bool operator==(const TokenStream& o) const {
    return header == o.header && prelude == o.prelude && body == o.body &&
           has_start == o.has_start && has_end == o.has_end;
  }
};

struct ParseOptions {
  bool strict = false;  // throw MissingStart when no start token is present
};

TokenStream parse_stream(std::string_view text, const ParseOptions& options = {});

// One token per word, single-space separated, header then start then body then end.
std::string serialize(const TokenStream& stream);
std::vector<std::string> to_words(const TokenStream& stream);

// Collapses every whitespace run to a single space and trims the ends.
std::string canonical_whitespace(std::string_view text);

// Splits on any whitespace.
std::vector<std::string_view> split_words(std::string_view text);

enum class Severity { Error, Warning };

struct Violation {
  std::size_t token_index = 0;  // position in the serialized word sequence
  Severity severity = Severity::Error;
  std::string message;
};

std::vector<Violation> validate(const TokenStream& stream);
std::size_t error_count(std::span<const Violation> violations);

// Index of the first body token within to_words(stream).
std::size_t body_offset(const TokenStream& stream);

struct Tuning {
  std::map<int, int> open_string_midi;
  int downtune_offset = 0;

  static Tuning standard_guitar(int downtune = 0);  // 6 strings plus s7 for 7-string
  static Tuning standard_bass(int downtune = 0);
  // Bass table for instruments whose name starts with "bass", guitar otherwise.
  static Tuning for_instrument(std::string_view instrument, int downtune = 0);
};

// Throws Error(UnknownString) when the string is absent from the table.
int pitch_of(const tok::Note& note, const Tuning& tuning);

struct NoteEvent {
  std::string instrument;
  std::int64_t onset_tick = 0;
  std::optional<int> midi_pitch;  // empty for drums
  std::int64_t duration_ticks = 0;
  std::vector<std::string> effects;

  bool pitched() const { return midi_pitch.has_value(); }
};

struct EventTimeline {
  std::vector<NoteEvent> events;
  std::int64_t total_ticks = 0;
  // Notes dropped because no tick elapsed after them or their string has no tuning entry.
  std::size_t dropped_notes = 0;

  std::size_t pitched_count() const;
};

// Replays the wait clock. Notes between two waits share an onset; a note's
// duration is the distance to the next onset of the same instrument (or to the
// end of the stream). nfx attaches to the preceding note of the beat, bfx to
// every note of the beat.
EventTimeline decode_events(const TokenStream& stream,
                            const std::optional<std::string>& instrument_filter = std::nullopt);

}  // namespace shredkit
