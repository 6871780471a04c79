#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "decline/time.hpp"

namespace decline::centrality {

class StoreFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CentralityPoint {
  Month month;
  float score = 0.0f;
  std::int32_t rank_neg = 0;
};

struct CentralitySeries {
  std::string package;
  std::vector<CentralityPoint> points;  // strictly increasing months
};

/// One ranking column. Entry i belongs to store package id i; a column
/// covers every package that existed in that month.
struct MonthColumn {
  Month month;
  std::vector<float> scores;
  std::vector<std::int32_t> ranks;

  bool operator==(const MonthColumn&) const = default;
};

/// Append-only store of monthly centrality columns.
///
/// Store ids are assigned by (first month present, package name), which is
/// recoverable from the CSV export alone; that makes export/import
/// reproduce the binary file byte for byte. Columns are shared immutable
/// values, so copying a store is cheap.
class SeriesStore {
 public:
  const std::vector<std::string>& names() const { return names_; }
  std::size_t package_count() const { return names_.size(); }
  std::size_t month_count() const { return columns_.size(); }
  bool empty() const { return columns_.empty(); }

  std::optional<Month> first_month() const;
  std::optional<Month> last_month() const;

  std::optional<std::uint32_t> find(std::string_view package) const;
  const MonthColumn& column(std::size_t i) const { return *columns_[i]; }
  const MonthColumn* column_for(Month month) const;

  /// Appends the column for `month`, which must directly follow the last
  /// stored month. `names[i]` labels `scores[i]` and `ranks[i]`; every
  /// package already in the store must appear.
  void append(Month month, std::span<const std::string> names, std::span<const double> scores,
              std::span<const std::int32_t> ranks);

  CentralitySeries series(std::uint32_t id) const;
  std::optional<CentralitySeries> series(std::string_view package) const;

  // Binary layout (little-endian): "DCSTORE1", u32 name count, u32 column
  // count, names as (u32 length, bytes), then per column: i32 month index,
  // u32 n, f32 scores[n], i32 ranks[n].
  void save(const std::filesystem::path& path) const;
  static SeriesStore load(const std::filesystem::path& path);
  void write_binary(std::ostream& out) const;
  static SeriesStore read_binary(std::istream& in);

  /// CSV with header "package,month,score,rank_neg", rows sorted by package
  /// then month.
  void write_csv(std::ostream& out) const;
  static SeriesStore read_csv(std::istream& in);

  friend bool operator==(const SeriesStore& a, const SeriesStore& b);

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::shared_ptr<const MonthColumn>> columns_;

  void add_name(std::string name);
};

}  // namespace decline::centrality
