#include "shredkit/tokens.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "shredkit/error.hpp"

namespace shredkit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<std::string_view> split_colon(std::string_view word) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    auto next = word.find(':', pos);
    if (next == std::string_view::npos) {
      parts.push_back(word.substr(pos));
      break;
    }
    parts.push_back(word.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

// Accepts only the spelling std::to_string would produce, so that integer
// tokens survive a text round trip unchanged.
std::optional<int> canonical_int(std::string_view s) {
  if (s.empty() || s.size() > 10) return std::nullopt;
  std::string_view digits = s[0] == '-' ? s.substr(1) : s;
  if (digits.empty()) return std::nullopt;
  if (digits[0] == '0' && (digits.size() > 1 || s[0] == '-')) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string join_colon(std::string_view head, const std::vector<std::string>& rest) {
  std::string out(head);
  for (const auto& r : rest) {
    out += ':';
    out += r;
  }
  return out;
}

std::vector<std::string> tail(const std::vector<std::string_view>& parts, std::size_t from) {
  std::vector<std::string> out;
  for (std::size_t i = from; i < parts.size(); ++i) out.emplace_back(parts[i]);
  return out;
}

bool is_header(const Token& t) {
  return is<tok::Artist>(t) || is<tok::Downtune>(t) || is<tok::Tempo>(t);
}

void apply_header(Header& h, const Token& t) {
  if (auto* a = std::get_if<tok::Artist>(&t)) h.artist = a->name;
  if (auto* d = std::get_if<tok::Downtune>(&t)) h.downtune = d->semitones;
  if (auto* p = std::get_if<tok::Tempo>(&t)) h.tempo = p->bpm;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingStart: return "MissingStart";
    case ErrorCode::UnknownString: return "UnknownString";
    case ErrorCode::EmptyTimeline: return "EmptyTimeline";
    case ErrorCode::NoPitchedEvents: return "NoPitchedEvents";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::BothEmpty: return "BothEmpty";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::InvalidArtistName: return "InvalidArtistName";
    case ErrorCode::MeasureOutOfRange: return "MeasureOutOfRange";
    case ErrorCode::NoMeasureTokens: return "NoMeasureTokens";
    case ErrorCode::TooFewSongs: return "TooFewSongs";
    case ErrorCode::UnknownArtist: return "UnknownArtist";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorCode::EmptyConfiguration: return "EmptyConfiguration";
    case ErrorCode::BadModelFile: return "BadModelFile";
  }
  return "Unknown";
}

std::string_view kind_name(const Token& t) {
  return std::visit(overloaded{
                        [](const tok::Artist&) { return "artist"; },
                        [](const tok::Downtune&) { return "downtune"; },
                        [](const tok::Tempo&) { return "tempo"; },
                        [](const tok::Start&) { return "start"; },
                        [](const tok::End&) { return "end"; },
                        [](const tok::Note&) { return "note"; },
                        [](const tok::Drums&) { return "drums"; },
                        [](const tok::Wait&) { return "wait"; },
                        [](const tok::NoteEffect&) { return "nfx"; },
                        [](const tok::BeatEffect&) { return "bfx"; },
                        [](const tok::NewMeasure&) { return "new_measure"; },
                        [](const tok::Unknown&) { return "unknown"; },
                    },
                    t);
}

Token parse_token(std::string_view word) {
  if (word == "start") return tok::Start{};
  if (word == "end") return tok::End{};
  if (word == "new_measure") return tok::NewMeasure{};

  auto parts = split_colon(word);
  const auto head = parts[0];
  if (parts.size() >= 2) {
    if (head == "artist") {
      auto name = word.substr(7);
      if (!name.empty()) return tok::Artist{std::string(name)};
    } else if (head == "downtune" && parts.size() == 2) {
      if (auto v = canonical_int(parts[1]); v && *v <= 0) return tok::Downtune{*v};
    } else if (head == "tempo" && parts.size() == 2) {
      if (auto v = canonical_int(parts[1]); v && *v > 0) return tok::Tempo{*v};
    } else if (head == "wait" && parts.size() == 2) {
      if (auto v = canonical_int(parts[1]); v && *v >= 0) return tok::Wait{*v};
    } else if ((head == "nfx" || head == "bfx") && !parts[1].empty()) {
      if (head == "nfx") return tok::NoteEffect{std::string(parts[1]), tail(parts, 2)};
      return tok::BeatEffect{std::string(parts[1]), tail(parts, 2)};
    } else if (head == "drums" && parts.size() >= 3 && parts[1] == "note") {
      auto type = word.substr(11);
      if (!type.empty()) return tok::Drums{std::string(type)};
    } else if (parts.size() == 4 && parts[1] == "note" && !head.empty() && head != "drums" &&
               parts[2].size() >= 2 && parts[2][0] == 's' && parts[3].size() >= 2 &&
               parts[3][0] == 'f') {
      auto s = canonical_int(parts[2].substr(1));
      auto f = canonical_int(parts[3].substr(1));
      if (s && f && *s >= 1 && *s <= 10 && *f >= 0 && *f <= 30) {
        return tok::Note{std::string(head), *s, *f};
      }
    }
  }
  return tok::Unknown{std::string(word)};
}

std::string to_text(const Token& t) {
  return std::visit(
      overloaded{
          [](const tok::Artist& a) { return "artist:" + a.name; },
          [](const tok::Downtune& d) { return "downtune:" + std::to_string(d.semitones); },
          [](const tok::Tempo& p) { return "tempo:" + std::to_string(p.bpm); },
          [](const tok::Start&) { return std::string("start"); },
          [](const tok::End&) { return std::string("end"); },
          [](const tok::NewMeasure&) { return std::string("new_measure"); },
          [](const tok::Note& n) {
            return n.instrument + ":note:s" + std::to_string(n.string_num) + ":f" +
                   std::to_string(n.fret);
          },
          [](const tok::Drums& d) { return "drums:note:" + d.note_type; },
          [](const tok::Wait& w) { return "wait:" + std::to_string(w.ticks); },
          [](const tok::NoteEffect& e) { return join_colon("nfx:" + e.effect, e.params); },
          [](const tok::BeatEffect& e) { return join_colon("bfx:" + e.effect, e.params); },
          [](const tok::Unknown& u) { return u.raw; },
      },
      t);
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) words.push_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::string canonical_whitespace(std::string_view text) {
  std::string out;
  for (auto w : split_words(text)) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

TokenStream parse_stream(std::string_view text, const ParseOptions& options) {
  auto words = split_words(text);
  std::vector<Token> tokens;
  tokens.reserve(words.size());
  for (auto w : words) tokens.push_back(parse_token(w));

  TokenStream stream;
  stream.has_start = false;
  stream.has_end = false;

  auto start_it = std::find_if(tokens.begin(), tokens.end(), is<tok::Start>);
  std::size_t pos = 0;
  if (start_it != tokens.end()) {
    const auto start_idx = static_cast<std::size_t>(start_it - tokens.begin());
    for (; pos < start_idx; ++pos) {
      if (is_header(tokens[pos])) {
        apply_header(stream.header, tokens[pos]);
      } else {
        stream.prelude.push_back(tokens[pos]);
      }
    }
    stream.has_start = true;
    ++pos;
  } else {
    if (options.strict) throw Error(ErrorCode::MissingStart, "no start token in stream");
    while (pos < tokens.size() && is_header(tokens[pos])) apply_header(stream.header, tokens[pos++]);
  }

  for (; pos < tokens.size(); ++pos) {
    if (is<tok::End>(tokens[pos])) {
      stream.has_end = true;
      ++pos;
      break;
    }
    stream.body.push_back(std::move(tokens[pos]));
  }
  if (pos < tokens.size()) {
    stream.warnings.push_back(std::to_string(tokens.size() - pos) + " token(s) after end ignored");
  }
  return stream;
}

std::vector<std::string> to_words(const TokenStream& stream) {
  std::vector<std::string> words;
  words.reserve(stream.body.size() + stream.prelude.size() + 5);
  const auto& h = stream.header;
  if (h.artist) words.push_back(to_text(tok::Artist{*h.artist}));
  if (h.downtune) words.push_back(to_text(tok::Downtune{*h.downtune}));
  if (h.tempo) words.push_back(to_text(tok::Tempo{*h.tempo}));
  for (const auto& t : stream.prelude) words.push_back(to_text(t));
  if (stream.has_start) words.emplace_back("start");
  for (const auto& t : stream.body) words.push_back(to_text(t));
  if (stream.has_end) words.emplace_back("end");
  return words;
}

std::string serialize(const TokenStream& stream) {
  std::string out;
  for (const auto& w : to_words(stream)) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::size_t body_offset(const TokenStream& stream) {
  const auto& h = stream.header;
  return static_cast<std::size_t>(h.artist.has_value()) + h.downtune.has_value() +
         h.tempo.has_value() + stream.prelude.size() + (stream.has_start ? 1 : 0);
}

std::vector<Violation> validate(const TokenStream& stream) {
  std::vector<Violation> out;
  std::size_t index = body_offset(stream) - stream.prelude.size() - (stream.has_start ? 1 : 0);

  for (const auto& t : stream.prelude) {
    if (is<tok::Unknown>(t)) {
      out.push_back({index, Severity::Warning, "unknown token '" + to_text(t) + "'"});
    } else {
      out.push_back({index, Severity::Error, std::string(kind_name(t)) + " before start"});
    }
    ++index;
  }
  if (stream.has_start) ++index;
  if (!stream.has_start && !stream.body.empty()) {
    out.push_back({index, Severity::Warning, "missing start"});
  }

  bool note_in_beat = false;
  for (const auto& t : stream.body) {
    if (auto* w = std::get_if<tok::Wait>(&t)) {
      if (w->ticks <= 0) out.push_back({index, Severity::Error, "zero wait"});
      note_in_beat = false;
    } else if (is_note_like(t)) {
      note_in_beat = true;
    } else if (is_effect(t)) {
      if (!note_in_beat) out.push_back({index, Severity::Error, "effect without note"});
    } else if (is<tok::Start>(t)) {
      out.push_back({index, Severity::Error, "start inside body"});
    } else if (is<tok::Artist>(t) || is<tok::Downtune>(t)) {
      out.push_back({index, Severity::Error, "header token inside body"});
    } else if (is<tok::Unknown>(t)) {
      out.push_back({index, Severity::Warning, "unknown token '" + to_text(t) + "'"});
    }
    ++index;
  }
  return out;
}

std::size_t error_count(std::span<const Violation> violations) {
  return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(), [](const auto& v) {
    return v.severity == Severity::Error;
  }));
}

Tuning Tuning::standard_guitar(int downtune) {
  return Tuning{{{1, 64}, {2, 59}, {3, 55}, {4, 50}, {5, 45}, {6, 40}, {7, 35}}, downtune};
}

Tuning Tuning::standard_bass(int downtune) {
  return Tuning{{{1, 43}, {2, 38}, {3, 33}, {4, 28}}, downtune};
}

Tuning Tuning::for_instrument(std::string_view instrument, int downtune) {
  if (instrument.starts_with("bass")) return standard_bass(downtune);
  return standard_guitar(downtune);
}

int pitch_of(const tok::Note& note, const Tuning& tuning) {
  auto it = tuning.open_string_midi.find(note.string_num);
  if (it == tuning.open_string_midi.end()) {
    throw Error(ErrorCode::UnknownString,
                "string " + std::to_string(note.string_num) + " not in tuning table");
  }
  return it->second + tuning.downtune_offset + note.fret;
}

std::size_t EventTimeline::pitched_count() const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [](const auto& e) { return e.pitched(); }));
}

EventTimeline decode_events(const TokenStream& stream,
                            const std::optional<std::string>& instrument_filter) {
  EventTimeline timeline;
  auto& events = timeline.events;
  const int downtune = stream.header.downtune_or_default();

  std::int64_t clock = 0;
  std::vector<std::size_t> beat_notes;
  std::vector<std::string> beat_effects;
  std::optional<std::size_t> last_note;

  auto close_beat = [&] {
    for (auto idx : beat_notes) {
      for (const auto& fx : beat_effects) events[idx].effects.push_back(fx);
    }
    beat_notes.clear();
    beat_effects.clear();
    last_note.reset();
  };

  auto accept = [&](std::string_view instrument) {
    return !instrument_filter || *instrument_filter == instrument;
  };

  for (const auto& t : stream.body) {
    if (auto* n = std::get_if<tok::Note>(&t)) {
      last_note.reset();
      if (!accept(n->instrument)) continue;
      std::optional<int> pitch;
      try {
        pitch = pitch_of(*n, Tuning::for_instrument(n->instrument, downtune));
      } catch (const Error&) {
      }
      if (!pitch || *pitch < 0 || *pitch > 127) {
        ++timeline.dropped_notes;
        continue;
      }
      events.push_back({n->instrument, clock, pitch, 0, {}});
      last_note = events.size() - 1;
      beat_notes.push_back(*last_note);
    } else if (std::get_if<tok::Drums>(&t)) {
      last_note.reset();
      if (!accept("drums")) continue;
      events.push_back({"drums", clock, std::nullopt, 0, {}});
      last_note = events.size() - 1;
      beat_notes.push_back(*last_note);
    } else if (auto* nfx = std::get_if<tok::NoteEffect>(&t)) {
      if (last_note) events[*last_note].effects.push_back(nfx->effect);
    } else if (auto* bfx = std::get_if<tok::BeatEffect>(&t)) {
      beat_effects.push_back(bfx->effect);
    } else if (auto* w = std::get_if<tok::Wait>(&t)) {
      clock += w->ticks;
      close_beat();
    }
  }
  close_beat();
  timeline.total_ticks = clock;

  // Inter-onset durations per instrument.
  std::map<std::string, std::vector<std::int64_t>> onsets;
  for (const auto& e : events) {
    auto& v = onsets[e.instrument];
    if (v.empty() || v.back() != e.onset_tick) v.push_back(e.onset_tick);
  }
  for (auto& e : events) {
    const auto& v = onsets[e.instrument];
    auto it = std::upper_bound(v.begin(), v.end(), e.onset_tick);
    e.duration_ticks = (it == v.end() ? clock : *it) - e.onset_tick;
  }
  auto zero = std::remove_if(events.begin(), events.end(),
                             [](const auto& e) { return e.duration_ticks <= 0; });
  timeline.dropped_notes += static_cast<std::size_t>(events.end() - zero);
  events.erase(zero, events.end());

  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    if (a.onset_tick != b.onset_tick) return a.onset_tick < b.onset_tick;
    if (a.instrument != b.instrument) return a.instrument < b.instrument;
    return a.midi_pitch < b.midi_pitch;
  });
  return timeline;
}

}  // namespace shredkit
