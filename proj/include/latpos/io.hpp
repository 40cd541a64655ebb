#pragma once

#include "latpos/core.hpp"
#include "latpos/messaging.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace latpos {

namespace fs = std::filesystem;

/// Optional first line "# <stamp>" written ahead of the CSV header. Readers
/// skip every line starting with '#'.
struct CsvStamp {
  std::string text;
};

/// Time-indexed per-actor rows `t,actor,<prefix>_1..<prefix>_m` (1-based
/// actor ids), one n x m matrix per time.
struct ActorTable {
  std::vector<double> times;
  std::vector<Matrix> values;
};

/// Events as `t,i,j` with 1-based ids and times printed with %.9f.
void write_events_csv(const fs::path &path, const std::vector<MessageEvent> &events,
                      const std::optional<CsvStamp> &stamp = std::nullopt);
/// Parses an event log (header optional). Ids are converted to 0-based; the
/// pair is stored with i < j. Order is preserved (not validated here).
std::vector<MessageEvent> read_events_csv(const fs::path &path);

void write_actor_table(const fs::path &path, const ActorTable &table,
                       const std::string &prefix,
                       const std::optional<CsvStamp> &stamp = std::nullopt);
ActorTable read_actor_table(const fs::path &path);

/// Plain matrix with a header row.
void write_matrix_csv(const fs::path &path, const Matrix &M,
                      const std::vector<std::string> &header,
                      const std::optional<CsvStamp> &stamp = std::nullopt);

/// Generic numeric columns with a header.
void write_columns_csv(const fs::path &path, const std::vector<std::string> &header,
                       const std::vector<std::vector<double>> &columns,
                       const std::optional<CsvStamp> &stamp = std::nullopt);

std::string read_text(const fs::path &path);
void write_text(const fs::path &path, const std::string &text);

} // namespace latpos
