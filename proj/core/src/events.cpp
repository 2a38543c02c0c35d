#include "rmats/events.hpp"

#include "rmats/csv.hpp"
#include "rmats/error.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace rmats {

namespace {

Date ymd(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

Date month_end(int y, unsigned m) {
  return Date{std::chrono::year_month_day_last{std::chrono::year{y}, std::chrono::month_day_last{std::chrono::month{m}}}};
}

}  // namespace

const std::vector<EventWindow>& default_events() {
  static const std::vector<EventWindow> events{
      {"SVB", ymd(2023, 3, 1), month_end(2023, 3)},
      {"Israel-Hamas", ymd(2023, 10, 1), month_end(2023, 11)},
      {"US-China", ymd(2024, 1, 1), month_end(2024, 2)},
      {"Middle East", ymd(2024, 4, 1), month_end(2024, 5)},
      {"Rate cut pivot", ymd(2024, 8, 1), month_end(2024, 9)},
  };
  return events;
}

std::vector<EventWindow> read_events(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ValidationError(std::string(source) + ": line " + std::to_string(line_no) + ": " + what);
  };
  bool header = false;
  std::vector<EventWindow> out;
  std::set<std::string> names;
  while (std::getline(in, line)) {
    ++line_no;
    csv::normalize_line(line, line_no == 1);
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    if (!header) {
      if (fields.size() != 3 || csv::trim(fields[0]) != "name" || csv::trim(fields[1]) != "start" ||
          csv::trim(fields[2]) != "end") {
        fail("expected header 'name,start,end'");
      }
      header = true;
      continue;
    }
    if (fields.size() != 3) fail("expected 3 fields, found " + std::to_string(fields.size()));
    EventWindow e;
    e.name = std::string(csv::trim(fields[0]));
    if (e.name.empty()) fail("empty event name");
    if (!names.insert(e.name).second) fail("duplicate event '" + e.name + "'");
    const auto s = parse_date(csv::trim(fields[1]));
    const auto t = parse_date(csv::trim(fields[2]));
    if (!s) fail("unparseable start date '" + std::string(fields[1]) + "'");
    if (!t) fail("unparseable end date '" + std::string(fields[2]) + "'");
    e.start = *s;
    e.end = *t;
    if (e.end < e.start) fail("event '" + e.name + "' ends before it starts");
    out.push_back(std::move(e));
  }
  if (!header) throw ValidationError(std::string(source) + ": empty events file");
  return out;
}

std::vector<EventWindow> load_events(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open events file " + path.string());
  return read_events(in, path.string());
}

void write_events(std::ostream& out, const std::vector<EventWindow>& events) {
  out << "name,start,end\n";
  for (const auto& e : events) out << e.name << ',' << format_date(e.start) << ',' << format_date(e.end) << '\n';
}

int event_index_at(const std::vector<EventWindow>& events, Date d) {
  int best = -1;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (d < events[i].start || events[i].end < d) continue;
    if (best < 0 || events[i].start < events[static_cast<std::size_t>(best)].start) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace rmats
