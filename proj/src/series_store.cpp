#include "decline/series_store.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace decline::centrality {
namespace {

constexpr char kMagic[8] = {'D', 'C', 'S', 'T', 'O', 'R', 'E', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw StoreFormatError("truncated store file");
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

std::string format_score(float score) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(score));
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') fields.back().pop_back();
  return fields;
}

}  // namespace

std::optional<Month> SeriesStore::first_month() const {
  if (columns_.empty()) return std::nullopt;
  return columns_.front()->month;
}

std::optional<Month> SeriesStore::last_month() const {
  if (columns_.empty()) return std::nullopt;
  return columns_.back()->month;
}

std::optional<std::uint32_t> SeriesStore::find(std::string_view package) const {
  if (auto it = index_.find(std::string(package)); it != index_.end()) return it->second;
  return std::nullopt;
}

const MonthColumn* SeriesStore::column_for(Month month) const {
  if (columns_.empty()) return nullptr;
  const int offset = month - columns_.front()->month;
  if (offset < 0 || offset >= static_cast<int>(columns_.size())) return nullptr;
  return columns_[static_cast<std::size_t>(offset)].get();
}

void SeriesStore::add_name(std::string name) {
  const auto id = static_cast<std::uint32_t>(names_.size());
  if (!index_.emplace(name, id).second) throw StoreFormatError("duplicate package " + name);
  names_.push_back(std::move(name));
}

void SeriesStore::append(Month month, std::span<const std::string> names, std::span<const double> scores,
                         std::span<const std::int32_t> ranks) {
  if (names.size() != scores.size() || names.size() != ranks.size()) {
    throw std::invalid_argument("column inputs differ in length");
  }
  if (!columns_.empty() && month != columns_.back()->month.next()) {
    throw std::invalid_argument("store months must be consecutive: got " + month.to_string() + " after " +
                                columns_.back()->month.to_string());
  }

  std::vector<std::uint32_t> slot(names.size());
  std::vector<std::size_t> fresh;
  std::size_t known = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (auto id = find(names[i])) {
      slot[i] = *id;
      ++known;
    } else {
      fresh.push_back(i);
    }
  }
  if (known != names_.size()) {
    throw std::invalid_argument("column for " + month.to_string() + " is missing previously stored packages");
  }
  std::sort(fresh.begin(), fresh.end(), [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });
  const std::size_t before = names_.size();
  try {
    for (std::size_t i : fresh) {
      slot[i] = static_cast<std::uint32_t>(names_.size());
      add_name(names[i]);
    }
  } catch (...) {
    for (std::size_t i = before; i < names_.size(); ++i) index_.erase(names_[i]);
    names_.resize(before);
    throw;
  }

  auto column = std::make_shared<MonthColumn>();
  column->month = month;
  column->scores.resize(names.size());
  column->ranks.resize(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    column->scores[slot[i]] = static_cast<float>(scores[i]);
    column->ranks[slot[i]] = ranks[i];
  }
  columns_.push_back(std::move(column));
}

CentralitySeries SeriesStore::series(std::uint32_t id) const {
  CentralitySeries s;
  s.package = names_.at(id);
  // Column sizes are non-decreasing; the first column that covers `id` is
  // the package's first month.
  auto first = std::partition_point(columns_.begin(), columns_.end(),
                                    [&](const auto& c) { return c->scores.size() <= id; });
  for (auto it = first; it != columns_.end(); ++it) {
    s.points.push_back({(*it)->month, (*it)->scores[id], (*it)->ranks[id]});
  }
  return s;
}

std::optional<CentralitySeries> SeriesStore::series(std::string_view package) const {
  if (auto id = find(package)) return series(*id);
  return std::nullopt;
}

void SeriesStore::write_binary(std::ostream& out) const {
  static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);
  out.write(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(names_.size()));
  put_u32(out, static_cast<std::uint32_t>(columns_.size()));
  for (const auto& name : names_) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  for (const auto& column : columns_) {
    put_u32(out, static_cast<std::uint32_t>(column->month.index()));
    put_u32(out, static_cast<std::uint32_t>(column->scores.size()));
    for (float f : column->scores) put_u32(out, std::bit_cast<std::uint32_t>(f));
    for (std::int32_t r : column->ranks) put_u32(out, static_cast<std::uint32_t>(r));
  }
}

SeriesStore SeriesStore::read_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw StoreFormatError("not a series store (bad magic)");
  }
  SeriesStore store;
  const std::uint32_t name_count = get_u32(in);
  const std::uint32_t column_count = get_u32(in);
  store.names_.reserve(name_count);
  for (std::uint32_t i = 0; i < name_count; ++i) {
    const std::uint32_t len = get_u32(in);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw StoreFormatError("truncated name table");
    store.add_name(std::move(name));
  }
  std::size_t previous_size = 0;
  for (std::uint32_t c = 0; c < column_count; ++c) {
    auto column = std::make_shared<MonthColumn>();
    column->month = Month::from_index(static_cast<std::int32_t>(get_u32(in)));
    const std::uint32_t n = get_u32(in);
    if (n > name_count || n < previous_size) throw StoreFormatError("column size out of range");
    if (!store.columns_.empty() && column->month != store.columns_.back()->month.next()) {
      throw StoreFormatError("non-consecutive months in store");
    }
    column->scores.resize(n);
    column->ranks.resize(n);
    for (auto& f : column->scores) f = std::bit_cast<float>(get_u32(in));
    for (auto& r : column->ranks) r = static_cast<std::int32_t>(get_u32(in));
    previous_size = n;
    store.columns_.push_back(std::move(column));
  }
  if (!store.columns_.empty() && previous_size != name_count) {
    throw StoreFormatError("last column does not cover every package");
  }
  return store;
}

void SeriesStore::save(const std::filesystem::path& path) const {
  // Write-then-rename so readers never observe a half-written store.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    write_binary(out);
    if (!out.flush()) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

SeriesStore SeriesStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open store " + path.string());
  return read_binary(in);
}

void SeriesStore::write_csv(std::ostream& out) const {
  out << "package,month,score,rank_neg\n";
  std::vector<std::uint32_t> order(names_.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return names_[a] < names_[b]; });
  for (std::uint32_t id : order) {
    const auto& name = names_[id];
    if (name.find_first_of(",\"\n\r") != std::string::npos) {
      throw StoreFormatError("package name not representable in CSV: " + name);
    }
    for (const auto& column : columns_) {
      if (id >= column->scores.size()) continue;
      out << name << ',' << column->month.to_string() << ',' << format_score(column->scores[id]) << ','
          << column->ranks[id] << '\n';
    }
  }
}

SeriesStore SeriesStore::read_csv(std::istream& in) {
  struct Row {
    float score;
    std::int32_t rank;
  };
  std::map<std::string, std::map<Month, Row>> rows;
  std::string line;
  if (!std::getline(in, line)) throw StoreFormatError("empty CSV");
  if (split_csv_line(line) != std::vector<std::string>{"package", "month", "score", "rank_neg"}) {
    throw StoreFormatError("unexpected CSV header: " + line);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw StoreFormatError("line " + std::to_string(line_no) + ": expected 4 fields");
    try {
      const Month month = Month::parse(f[1]);
      std::size_t used = 0;
      const float score = std::stof(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("score");
      const long rank = std::stol(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument("rank");
      if (!rows[f[0]].emplace(month, Row{score, static_cast<std::int32_t>(rank)}).second) {
        throw StoreFormatError("duplicate row");
      }
    } catch (const std::logic_error& e) {
      throw StoreFormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  SeriesStore store;
  if (rows.empty()) return store;

  Month first = rows.begin()->second.begin()->first;
  Month last = first;
  std::vector<std::pair<Month, const std::string*>> order;
  for (const auto& [name, months] : rows) {
    first = std::min(first, months.begin()->first);
    last = std::max(last, months.rbegin()->first);
    order.emplace_back(months.begin()->first, &name);
  }
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first != b.first ? a.first < b.first : *a.second < *b.second; });
  for (const auto& [m, name] : order) store.add_name(*name);

  for (Month month = first; month <= last; month = month.next()) {
    auto column = std::make_shared<MonthColumn>();
    column->month = month;
    for (std::uint32_t id = 0; id < store.names_.size() && order[id].first <= month; ++id) {
      const auto& months = rows.at(store.names_[id]);
      auto it = months.find(month);
      if (it == months.end()) {
        throw StoreFormatError("package " + store.names_[id] + " has no row for " + month.to_string());
      }
      column->scores.push_back(it->second.score);
      column->ranks.push_back(it->second.rank);
    }
    store.columns_.push_back(std::move(column));
  }
  return store;
}

bool operator==(const SeriesStore& a, const SeriesStore& b) {
  if (a.names_ != b.names_ || a.columns_.size() != b.columns_.size()) return false;
  for (std::size_t i = 0; i < a.columns_.size(); ++i) {
    const auto& x = *a.columns_[i];
    const auto& y = *b.columns_[i];
    if (x.month != y.month || x.ranks != y.ranks || x.scores.size() != y.scores.size()) return false;
    // Compare bit patterns so NaN payloads and signed zeros count.
    for (std::size_t j = 0; j < x.scores.size(); ++j) {
      if (std::bit_cast<std::uint32_t>(x.scores[j]) != std::bit_cast<std::uint32_t>(y.scores[j])) return false;
    }
  }
  return true;
}

}  // namespace decline::centrality
