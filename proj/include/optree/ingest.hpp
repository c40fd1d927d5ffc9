#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "optree/event.hpp"

namespace optree {

enum class ExportFormat { event_lines, calendar_file, mailbox_file };

/// "event-lines" | "calendar-file" | "mailbox-file"; throws Error("UnknownFormat").
ExportFormat parse_export_format(std::string_view name);
/// .jsonl/.ndjson -> event-lines, .ics -> calendar-file, .mbox -> mailbox-file.
ExportFormat format_from_extension(const std::filesystem::path& path);

/// Parses an export file into the builder's staging buffer. Malformed records
/// are skipped and recorded on the builder. Returns the number of events added.
/// Throws Error("UnreadableFile") when the file cannot be opened.
size_t ingest_export(StoreBuilder& builder, const std::filesystem::path& path, ExportFormat format);

// Stream variants, used by tests and by ingest_export.
size_t ingest_event_lines(StoreBuilder& builder, std::istream& in);
size_t ingest_calendar(StoreBuilder& builder, std::istream& in);
size_t ingest_mailbox(StoreBuilder& builder, std::istream& in);

/// Canonical store dump: one event-lines record per event in store order,
/// keys sorted. Re-ingesting the dump reproduces the store exactly.
void write_store(const EventStore& store, std::ostream& out);
std::string dump_store(const EventStore& store);
/// Loads a dump (or any event-lines file) and finalizes it.
EventStore load_store(const std::filesystem::path& path);

/// Parses "Mon, 19 Aug 2024 12:00:00 +0200" style dates; the zone is dropped.
std::optional<DateTime> parse_rfc2822_datetime(std::string_view s);

}  // namespace optree
