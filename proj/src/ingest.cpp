#include "optree/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "optree/json_codec.hpp"

namespace optree {

json value_to_json(const Value& v) {
    switch (v.kind()) {
        case Value::Kind::null: return nullptr;
        case Value::Kind::integer: return v.integer();
        case Value::Kind::real: return v.real();
        case Value::Kind::list: {
            json arr = json::array();
            for (const auto& item : v.list()) arr.push_back(value_to_json(item));
            return arr;
        }
        default: return to_text(v);
    }
}

static Value scalar_from_json(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return Value();
        case json::value_t::string: return infer_from_text(j.get<std::string>());
        case json::value_t::boolean: return Value(j.get<bool>() ? "true" : "false");
        case json::value_t::number_integer: return Value(j.get<int64_t>());
        case json::value_t::number_unsigned: return Value(static_cast<int64_t>(j.get<uint64_t>()));
        case json::value_t::number_float: return Value(j.get<double>());
        default: throw Error("BadValue", "unsupported JSON value");
    }
}

Value value_from_json(const json& j) {
    if (j.is_array()) {
        Value::List items;
        for (const auto& item : j) {
            if (item.is_array() || item.is_object())
                throw Error("BadValue", "nested structures are not allowed in list values");
            items.push_back(scalar_from_json(item));
        }
        return Value(std::move(items));
    }
    if (j.is_object()) throw Error("BadValue", "object values are not supported");
    return scalar_from_json(j);
}

ExportFormat parse_export_format(std::string_view name) {
    if (name == "event-lines") return ExportFormat::event_lines;
    if (name == "calendar-file") return ExportFormat::calendar_file;
    if (name == "mailbox-file") return ExportFormat::mailbox_file;
    throw Error("UnknownFormat", "unknown export format '" + std::string(name) + "'");
}

ExportFormat format_from_extension(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".jsonl" || ext == ".ndjson" || ext == ".events") return ExportFormat::event_lines;
    if (ext == ".ics") return ExportFormat::calendar_file;
    if (ext == ".mbox") return ExportFormat::mailbox_file;
    throw Error("UnknownFormat", "cannot infer export format from '" + path.string() + "'");
}

size_t ingest_export(StoreBuilder& builder, const std::filesystem::path& path, ExportFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("UnreadableFile", "cannot open '" + path.string() + "'");
    switch (format) {
        case ExportFormat::event_lines: return ingest_event_lines(builder, in);
        case ExportFormat::calendar_file: return ingest_calendar(builder, in);
        case ExportFormat::mailbox_file: return ingest_mailbox(builder, in);
    }
    return 0;
}

static std::optional<DateTime> parse_start_like(const json& j) {
    if (!j.is_string()) return std::nullopt;
    auto s = j.get<std::string>();
    if (auto dt = parse_iso_datetime(s)) return dt;
    if (auto d = parse_iso_date(s)) return at_midnight(*d);
    return std::nullopt;
}

size_t ingest_event_lines(StoreBuilder& builder, std::istream& in) {
    size_t added = 0;
    size_t line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }))
            continue;
        const std::string where = "line " + std::to_string(line_no);
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            builder.note_skip(where + ": not a JSON object");
            continue;
        }
        auto src_it = rec.find("source");
        if (src_it == rec.end() || !src_it->is_string()) {
            builder.note_skip(where + ": missing source");
            continue;
        }
        auto source = parse_source(src_it->get<std::string>());
        if (!source) {
            builder.note_skip(where + ": unknown source");
            continue;
        }
        auto start_it = rec.find("start");
        std::optional<DateTime> start = start_it == rec.end() ? std::nullopt : parse_start_like(*start_it);
        if (!start) {
            builder.note_skip(where + ": missing or malformed start");
            continue;
        }
        DateTime end = *start;
        if (auto end_it = rec.find("end"); end_it != rec.end() && !end_it->is_null()) {
            auto parsed = parse_start_like(*end_it);
            if (!parsed) {
                builder.note_skip(where + ": malformed end");
                continue;
            }
            end = *parsed;
        }
        std::string id;
        if (auto id_it = rec.find("id"); id_it != rec.end()) {
            if (!id_it->is_string() || id_it->get<std::string>().empty()) {
                builder.note_skip(where + ": malformed id");
                continue;
            }
            id = id_it->get<std::string>();
        } else {
            id = builder.next_id();
        }
        Attrs attrs;
        bool ok = true;
        for (auto it = rec.begin(); it != rec.end() && ok; ++it) {
            if (it.key() == "id" || it.key() == "start" || it.key() == "end" || it.key() == "source")
                continue;
            if (it->is_null()) continue;
            std::string key = normalize_key(it.key());
            try {
                attrs.insert_or_assign(std::move(key), value_from_json(*it));
            } catch (const Error&) {
                ok = false;
            }
        }
        if (!ok) {
            builder.note_skip(where + ": unsupported attribute value");
            continue;
        }
        if (builder.add(Event::make(std::move(id), *source, TimeSpan{*start, end}, std::move(attrs))))
            ++added;
    }
    return added;
}

namespace {

std::string rstrip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

// iCalendar date or date-time: 20240819 or 20240819T120000[Z].
std::optional<DateTime> parse_ical_datetime(std::string_view v) {
    auto digits = [&](size_t pos, size_t len, int& out) {
        if (pos + len > v.size()) return false;
        out = 0;
        for (size_t i = pos; i < pos + len; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(v[i]))) return false;
            out = out * 10 + (v[i] - '0');
        }
        return true;
    };
    int y, m, d, hh = 0, mm = 0, ss = 0;
    if (!digits(0, 4, y) || !digits(4, 2, m) || !digits(6, 2, d)) return std::nullopt;
    if (!valid_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d))) return std::nullopt;
    if (v.size() > 8) {
        if (v[8] != 'T' || !digits(9, 2, hh) || !digits(11, 2, mm) || !digits(13, 2, ss))
            return std::nullopt;
        std::string_view rest = v.substr(15);
        if (!(rest.empty() || rest == "Z")) return std::nullopt;
        if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
    }
    return make_datetime(y, static_cast<unsigned>(m), static_cast<unsigned>(d), hh, mm, ss);
}

std::string ical_unescape(std::string_view v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (v[i] == '\\' && i + 1 < v.size()) {
            char n = v[++i];
            out += (n == 'n' || n == 'N') ? '\n' : n;
        } else {
            out += v[i];
        }
    }
    return out;
}

}  // namespace

size_t ingest_calendar(StoreBuilder& builder, std::istream& in) {
    // Unfold continuation lines first.
    std::vector<std::string> lines;
    std::string raw;
    while (std::getline(in, raw)) {
        raw = rstrip_cr(std::move(raw));
        if (!raw.empty() && (raw[0] == ' ' || raw[0] == '\t') && !lines.empty())
            lines.back() += raw.substr(1);
        else
            lines.push_back(std::move(raw));
    }
    size_t added = 0;
    bool in_event = false;
    size_t event_no = 0;
    std::map<std::string, std::string> props;
    for (const auto& line : lines) {
        if (line == "BEGIN:VEVENT") {
            in_event = true;
            props.clear();
            ++event_no;
            continue;
        }
        if (line == "END:VEVENT") {
            in_event = false;
            const std::string where = "VEVENT " + std::to_string(event_no);
            auto start_it = props.find("DTSTART");
            auto start = start_it == props.end() ? std::nullopt : parse_ical_datetime(start_it->second);
            if (!start) {
                builder.note_skip(where + ": missing or malformed DTSTART");
                continue;
            }
            DateTime end = *start;
            if (auto end_it = props.find("DTEND"); end_it != props.end()) {
                auto parsed = parse_ical_datetime(end_it->second);
                if (!parsed) {
                    builder.note_skip(where + ": malformed DTEND");
                    continue;
                }
                end = *parsed;
            }
            Attrs attrs;
            for (const char* name : {"SUMMARY", "DESCRIPTION", "LOCATION"}) {
                if (auto it = props.find(name); it != props.end() && !it->second.empty())
                    attrs.emplace(normalize_key(name), Value(ical_unescape(it->second)));
            }
            std::string id;
            if (auto uid = props.find("UID"); uid != props.end() && !uid->second.empty())
                id = uid->second;
            else
                id = builder.next_id();
            if (builder.add(Event::make(std::move(id), Source::calendar, TimeSpan{*start, end},
                                        std::move(attrs))))
                ++added;
            continue;
        }
        if (!in_event) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string name = line.substr(0, colon);
        if (auto semi = name.find(';'); semi != std::string::npos) name.resize(semi);
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
        props[name] = line.substr(colon + 1);
    }
    return added;
}

std::optional<DateTime> parse_rfc2822_datetime(std::string_view s) {
    static constexpr std::string_view months[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                                  "jul", "aug", "sep", "oct", "nov", "dec"};
    std::string text(s);
    if (auto comma = text.find(','); comma != std::string::npos) text = text.substr(comma + 1);
    std::istringstream is(text);
    int day = 0, year = 0;
    std::string mon, clock;
    if (!(is >> day >> mon >> year >> clock)) return std::nullopt;
    std::transform(mon.begin(), mon.end(), mon.begin(), [](unsigned char c) { return std::tolower(c); });
    unsigned m = 0;
    for (unsigned i = 0; i < 12; ++i)
        if (mon.substr(0, 3) == months[i]) m = i + 1;
    if (m == 0 || !valid_civil(year, m, static_cast<unsigned>(day))) return std::nullopt;
    auto t = parse_iso_time(clock);
    if (!t) return std::nullopt;
    return combine(Date{days_from_civil(year, m, static_cast<unsigned>(day))}, *t);
}

size_t ingest_mailbox(StoreBuilder& builder, std::istream& in) {
    struct Message {
        std::vector<std::string> lines;
    };
    std::vector<Message> messages;
    std::string raw;
    bool prev_blank = true;
    while (std::getline(in, raw)) {
        raw = rstrip_cr(std::move(raw));
        if (prev_blank && raw.rfind("From ", 0) == 0) {
            messages.emplace_back();
            prev_blank = false;
            continue;
        }
        if (!messages.empty()) messages.back().lines.push_back(raw);
        prev_blank = raw.empty();
    }
    size_t added = 0;
    size_t msg_no = 0;
    for (auto& msg : messages) {
        ++msg_no;
        const std::string where = "message " + std::to_string(msg_no);
        std::map<std::string, std::string> headers;
        size_t i = 0;
        std::string last;
        for (; i < msg.lines.size() && !msg.lines[i].empty(); ++i) {
            const auto& line = msg.lines[i];
            if ((line[0] == ' ' || line[0] == '\t') && !last.empty()) {
                headers[last] += " " + line.substr(1);
                continue;
            }
            auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            last = line.substr(0, colon);
            std::transform(last.begin(), last.end(), last.begin(), [](unsigned char c) { return std::tolower(c); });
            std::string v = line.substr(colon + 1);
            v.erase(0, v.find_first_not_of(" \t"));
            headers[last] = v;
        }
        std::string body;
        for (++i; i < msg.lines.size(); ++i) {
            std::string line = msg.lines[i];
            if (line.rfind(">From ", 0) == 0) line.erase(0, 1);
            if (!body.empty()) body += '\n';
            body += line;
        }
        while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.pop_back();

        auto date_it = headers.find("date");
        std::optional<DateTime> when;
        if (date_it != headers.end()) {
            when = parse_rfc2822_datetime(date_it->second);
            if (!when) when = parse_iso_datetime(date_it->second);
        }
        if (!when) {
            builder.note_skip(where + ": missing or malformed Date");
            continue;
        }
        Attrs attrs;
        if (auto it = headers.find("from"); it != headers.end()) attrs.emplace("sender", Value(it->second));
        if (auto it = headers.find("to"); it != headers.end()) {
            Value::List rcpts;
            std::stringstream ss(it->second);
            std::string part;
            while (std::getline(ss, part, ',')) {
                part.erase(0, part.find_first_not_of(" \t"));
                while (!part.empty() && std::isspace(static_cast<unsigned char>(part.back()))) part.pop_back();
                if (!part.empty()) rcpts.emplace_back(part);
            }
            attrs.emplace("recipients", Value(std::move(rcpts)));
        }
        if (auto it = headers.find("subject"); it != headers.end()) attrs.emplace("subject", Value(it->second));
        if (!body.empty()) attrs.emplace("text", Value(body));
        if (builder.add(Event::make(builder.next_id(), Source::mail, TimeSpan{*when, *when}, std::move(attrs))))
            ++added;
    }
    return added;
}

void write_store(const EventStore& store, std::ostream& out) {
    for (const auto& e : store.events()) {
        json rec = json::object();
        rec["id"] = e.id;
        rec["start"] = format_datetime(e.span.start);
        rec["end"] = format_datetime(e.span.end);
        for (const auto& [key, value] : e.attrs) {
            if (value.is_null()) continue;
            rec[key] = value_to_json(value);
        }
        out << rec.dump() << '\n';
    }
}

std::string dump_store(const EventStore& store) {
    std::ostringstream os;
    write_store(store, os);
    return os.str();
}

EventStore load_store(const std::filesystem::path& path) {
    StoreBuilder builder;
    ingest_export(builder, path, ExportFormat::event_lines);
    return builder.finalize();
}

}  // namespace optree
