#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "celldiag/errors.hpp"
#include "celldiag/kpi.hpp"

namespace celldiag {

enum class AttributeKind { Numeric, Text, Nominal };

struct Attribute {
    std::string name;
    AttributeKind kind = AttributeKind::Numeric;
    std::vector<std::string> nominal_values;  // Nominal only

    bool operator==(const Attribute&) const = default;
};

/// A cell value: numeric or text. Nominal attributes store their value as text.
using Value = std::variant<double, std::string>;
using Row = std::vector<Value>;

/// A parsed or generated relation. Rows are generic; KPI-schema datasets
/// convert to KpiRecord via to_kpi_records.
struct Dataset {
    std::string relation_name;
    std::vector<Attribute> attributes;
    std::vector<Row> rows;
    std::string provenance;  // source path or "generated"; not serialized

    std::size_t size() const { return rows.size(); }

    /// Structural equality; provenance is ignored.
    bool same_content(const Dataset& other) const;
};

// ---------------------------------------------------------------------------
// ARFF subset
// ---------------------------------------------------------------------------

/// Parses the supported ARFF subset: '%' comment lines, @relation,
/// @attribute (numeric | string | {nominal set}), @data with comma-separated
/// rows. Keywords are case-insensitive; LF and CRLF both accepted.
/// Missing-value tokens '?' are rejected with ValidationError.
Dataset read_arff(std::istream& in, std::string provenance = "stream");
Dataset read_arff_file(const std::string& path);

void write_arff(const Dataset& d, std::ostream& out);
std::string write_arff_string(const Dataset& d);
void write_arff_file(const Dataset& d, const std::string& path);

// ---------------------------------------------------------------------------
// CSV (KPI schema)
// ---------------------------------------------------------------------------

/// Reads a KPI dataset from CSV. With has_header the column names must
/// resolve to the KPI schema (case-insensitive, spaces/underscores
/// equivalent), optionally plus a diagnosis column. Without a header the
/// file must have 8 numeric columns, or 9 with a trailing diagnosis.
Dataset read_csv(std::istream& in, bool has_header, std::string provenance = "stream");
Dataset read_csv_file(const std::string& path, bool has_header = true);

void write_csv(const Dataset& d, std::ostream& out);
void write_csv_file(const Dataset& d, const std::string& path);

// ---------------------------------------------------------------------------
// Train/test split
// ---------------------------------------------------------------------------

struct SplitSpec {
    double train_fraction = 0.8;  // in (0,1)
    std::uint64_t seed = 0;
};

struct SplitResult {
    Dataset train;
    Dataset test;
};

/// Seeded shuffle, |train| = round(train_fraction * N). Disjoint and
/// exhaustive; row order within each part follows the input order.
SplitResult split(const Dataset& d, const SplitSpec& s);

// ---------------------------------------------------------------------------
// KPI record conversion
// ---------------------------------------------------------------------------

/// True when the dataset's attributes are exactly the 8 KPI attributes
/// (any alias spelling, any order) plus an optional diagnosis column.
bool is_kpi_schema(const Dataset& d);

/// Converts a KPI-schema dataset to records. Cell ids are synthesized as
/// "cell-<row>" (1-based). Raises ValidationError on schema mismatch,
/// negative values, or unknown diagnosis labels.
std::vector<KpiRecord> to_kpi_records(const Dataset& d);

/// Builds the canonical 9-attribute dataset (8 numeric + nominal Diagnosis
/// when records are labeled). Records must be uniformly labeled or
/// uniformly unlabeled.
Dataset from_kpi_records(const std::vector<KpiRecord>& records,
                         std::string relation_name = "Cell Performance");

// ---------------------------------------------------------------------------
// Raw counter CSV (for KPI derivation)
// ---------------------------------------------------------------------------

/// Header: cell_id,CA,CF,CS,TE,OE,SDCCHSA,SSDCCH (names case-insensitive).
std::vector<CounterRecord> read_counters_csv(std::istream& in);
std::vector<CounterRecord> read_counters_csv_file(const std::string& path);

} // namespace celldiag
