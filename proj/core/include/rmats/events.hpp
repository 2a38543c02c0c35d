#pragma once

#include "rmats/price_table.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rmats {

struct EventWindow {
  std::string name;
  Date start;
  Date end;
};

// The five stress windows of the 2023-2025 test period, each spanning whole
// calendar months.
const std::vector<EventWindow>& default_events();

// `name,start,end` with ISO dates. Throws ValidationError with line numbers.
std::vector<EventWindow> read_events(std::istream& in, std::string_view source = "<stream>");
std::vector<EventWindow> load_events(const std::filesystem::path& path);
void write_events(std::ostream& out, const std::vector<EventWindow>& events);

// Index of the event covering `d`, earliest start first; -1 if none.
int event_index_at(const std::vector<EventWindow>& events, Date d);

}  // namespace rmats
