#include "celldiag/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "celldiag/rng.hpp"
#include "celldiag/text.hpp"

namespace celldiag {

bool Dataset::same_content(const Dataset& other) const {
    return relation_name == other.relation_name && attributes == other.attributes &&
           rows == other.rows;
}

namespace {

// Reads a line tolerating CRLF; returns false at EOF.
bool get_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

bool is_comment_or_blank(const std::string& line) {
    const std::string t = trim(line);
    return t.empty() || t[0] == '%';
}

// Splits a data line on commas honoring single/double quotes. Quoted
// segments may contain commas; a doubled quote inside a same-quoted field
// is an escaped quote. Unquoted fields are trimmed, quoted ones kept as-is.
std::vector<std::string> split_fields(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    char quote = '\0';
    bool was_quoted = false;
    auto flush = [&] {
        fields.push_back(was_quoted ? cur : trim(cur));
        cur.clear();
        was_quoted = false;
    };
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quote != '\0') {
            if (c == quote) {
                if (i + 1 < line.size() && line[i + 1] == quote) {
                    cur.push_back(quote);
                    ++i;
                } else {
                    quote = '\0';
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '\'' || c == '"') {
            quote = c;
            was_quoted = true;
        } else if (c == ',') {
            flush();
        } else {
            cur.push_back(c);
        }
    }
    if (quote != '\0') throw ParseError("unterminated quote", line_no);
    flush();
    return fields;
}

// Extracts a possibly-quoted token starting at pos; advances pos past it.
std::string take_token(const std::string& line, std::size_t& pos, std::size_t line_no) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos >= line.size()) throw ParseError("unexpected end of line", line_no);
    std::string token;
    if (line[pos] == '\'' || line[pos] == '"') {
        const char quote = line[pos];
        ++pos;
        while (pos < line.size() && line[pos] != quote) token.push_back(line[pos++]);
        if (pos >= line.size()) throw ParseError("unterminated quoted name", line_no);
        ++pos;
    } else {
        while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos])))
            token.push_back(line[pos++]);
    }
    return token;
}

void reject_missing(const std::vector<std::string>& fields, std::size_t line_no) {
    const auto missing = std::count(fields.begin(), fields.end(), "?");
    if (missing > 0)
        throw ValidationError("line " + std::to_string(line_no) + ": " + std::to_string(missing) +
                              " missing value(s) '?'; records with missing values are rejected");
}

void check_finite(double v, std::size_t line_no, std::size_t col) {
    if (!std::isfinite(v)) throw ParseError("non-finite numeric value", line_no, col);
}

Value parse_cell(const Attribute& attr, const std::string& field, std::size_t line_no,
                 std::size_t col) {
    switch (attr.kind) {
        case AttributeKind::Numeric: {
            double v = 0;
            if (!parse_double(field, v))
                throw ParseError("expected a number in attribute '" + attr.name + "', got '" +
                                     field + "'",
                                 line_no, col);
            check_finite(v, line_no, col);
            return v;
        }
        case AttributeKind::Nominal: {
            if (std::find(attr.nominal_values.begin(), attr.nominal_values.end(), field) ==
                attr.nominal_values.end())
                throw ParseError("value '" + field + "' not in the nominal set of '" + attr.name +
                                     "'",
                                 line_no, col);
            return field;
        }
        case AttributeKind::Text:
            return field;
    }
    throw ParseError("bad attribute kind", line_no, col);
}

} // namespace

Dataset read_arff(std::istream& in, std::string provenance) {
    Dataset d;
    d.provenance = std::move(provenance);

    std::string line;
    std::size_t line_no = 0;
    bool saw_relation = false;
    bool in_data = false;

    while (get_line(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        const std::string t = trim(line);

        if (!in_data) {
            if (starts_with_ci(t, "@relation")) {
                std::size_t pos = 9;
                d.relation_name = take_token(t, pos, line_no);
                saw_relation = true;
            } else if (starts_with_ci(t, "@attribute")) {
                std::size_t pos = 10;
                Attribute attr;
                attr.name = take_token(t, pos, line_no);
                while (pos < t.size() && std::isspace(static_cast<unsigned char>(t[pos]))) ++pos;
                if (pos >= t.size())
                    throw ParseError("attribute '" + attr.name + "' has no type", line_no);
                std::string kind = trim(t.substr(pos));
                if (!kind.empty() && kind.front() == '{') {
                    if (kind.back() != '}')
                        throw ParseError("unterminated nominal value set", line_no);
                    attr.kind = AttributeKind::Nominal;
                    const std::string body = kind.substr(1, kind.size() - 2);
                    for (const auto& part : split_fields(body, line_no)) {
                        if (part.empty())
                            throw ParseError("empty nominal value", line_no);
                        attr.nominal_values.push_back(part);
                    }
                    if (attr.nominal_values.empty())
                        throw ParseError("empty nominal value set", line_no);
                } else {
                    const std::string k = to_lower(kind);
                    if (k == "numeric" || k == "real" || k == "integer")
                        attr.kind = AttributeKind::Numeric;
                    else if (k == "string" || k == "text")
                        attr.kind = AttributeKind::Text;
                    else
                        throw ParseError("unknown attribute kind '" + kind + "'", line_no);
                }
                d.attributes.push_back(std::move(attr));
            } else if (starts_with_ci(t, "@data")) {
                if (!saw_relation) throw ParseError("@data before @relation", line_no);
                if (d.attributes.empty()) throw ParseError("@data with no attributes", line_no);
                in_data = true;
            } else {
                throw ParseError("unexpected declaration '" + t + "'", line_no);
            }
            continue;
        }

        auto fields = split_fields(t, line_no);
        if (fields.size() != d.attributes.size())
            throw ParseError("row has " + std::to_string(fields.size()) + " values, schema has " +
                                 std::to_string(d.attributes.size()),
                             line_no);
        reject_missing(fields, line_no);
        Row row;
        row.reserve(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i)
            row.push_back(parse_cell(d.attributes[i], fields[i], line_no, i + 1));
        d.rows.push_back(std::move(row));
    }

    if (!in_data) throw ParseError("no @data section", line_no == 0 ? 1 : line_no);
    return d;
}

Dataset read_arff_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return read_arff(in, path);
}

namespace {

bool needs_quoting(const std::string& s) {
    if (s.empty()) return true;
    if (s == "?") return true;
    if (s.front() == ' ' || s.back() == ' ') return true;
    return s.find_first_of(",'\"{}%") != std::string::npos;
}

std::string quote_string(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "''";
        else out.push_back(c);
    }
    out += "'";
    return out;
}

// comma-separated values keep internal spaces ("Class A" stays bare); names
// are whitespace-tokenized and must be quoted when they contain any
std::string arff_quote(const std::string& s) {
    return needs_quoting(s) ? quote_string(s) : s;
}

std::string arff_quote_name(const std::string& s) {
    if (needs_quoting(s) || s.find_first_of(" \t") != std::string::npos)
        return quote_string(s);
    return s;
}

std::string render_value(const Attribute& attr, const Value& v) {
    if (attr.kind == AttributeKind::Numeric) {
        const double num = std::get<double>(v);
        if (!std::isfinite(num))
            throw ValidationError("non-finite value in attribute '" + attr.name + "'");
        return format_double(num);
    }
    return arff_quote(std::get<std::string>(v));
}

} // namespace

void write_arff(const Dataset& d, std::ostream& out) {
    out << "@relation " << arff_quote_name(d.relation_name) << "\n\n";
    for (const auto& attr : d.attributes) {
        out << "@attribute " << arff_quote_name(attr.name) << " ";
        switch (attr.kind) {
            case AttributeKind::Numeric: out << "numeric"; break;
            case AttributeKind::Text: out << "string"; break;
            case AttributeKind::Nominal: {
                out << "{";
                for (std::size_t i = 0; i < attr.nominal_values.size(); ++i) {
                    if (i) out << ",";
                    out << arff_quote(attr.nominal_values[i]);
                }
                out << "}";
                break;
            }
        }
        out << "\n";
    }
    out << "\n@data\n";
    for (const auto& row : d.rows) {
        if (row.size() != d.attributes.size())
            throw ValidationError("row arity does not match schema");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            out << render_value(d.attributes[i], row[i]);
        }
        out << "\n";
    }
}

std::string write_arff_string(const Dataset& d) {
    std::ostringstream out;
    write_arff(d, out);
    return out.str();
}

void write_arff_file(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    write_arff(d, out);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

// RFC-4180 style field split: double quotes, "" escapes.
std::vector<std::string> split_csv_fields(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw ParseError("unterminated quote", line_no);
    fields.push_back(cur);
    return fields;
}

std::vector<Attribute> kpi_attributes(bool with_diagnosis,
                                      const std::vector<std::string>& nominal_set) {
    std::vector<Attribute> attrs;
    for (std::size_t i = 0; i < kKpiAttributeCount; ++i)
        attrs.push_back({std::string(kpi_attribute_name(static_cast<KpiAttribute>(i))),
                         AttributeKind::Numeric,
                         {}});
    if (with_diagnosis)
        attrs.push_back({"Diagnosis", AttributeKind::Nominal, nominal_set});
    return attrs;
}

std::vector<std::string> diagnosis_nominal_set(bool include_unclassified) {
    std::vector<std::string> set;
    for (DiagnosisClass c : kClassOrder) set.emplace_back(to_string(c));
    if (include_unclassified) set.emplace_back(to_string(DiagnosisClass::Unclassified));
    return set;
}

} // namespace

Dataset read_csv(std::istream& in, bool has_header, std::string provenance) {
    std::string line;
    std::size_t line_no = 0;

    // column index (in file) -> attribute slot; kKpiAttributeCount = diagnosis
    std::vector<std::size_t> column_slot;
    bool has_diagnosis = false;

    if (has_header) {
        if (!get_line(in, line)) throw ParseError("empty input, header expected", 1);
        ++line_no;
        const auto names = split_csv_fields(line, line_no);
        std::vector<bool> seen(kKpiAttributeCount + 1, false);
        for (const auto& name : names) {
            if (normalize_name(name) == "diagnosis") {
                if (seen[kKpiAttributeCount]) throw ParseError("duplicate diagnosis column", line_no);
                seen[kKpiAttributeCount] = true;
                has_diagnosis = true;
                column_slot.push_back(kKpiAttributeCount);
                continue;
            }
            const auto attr = resolve_kpi_attribute(name);
            if (!attr)
                throw ParseError("unknown column '" + trim(name) + "'", line_no);
            const auto slot = static_cast<std::size_t>(*attr);
            if (seen[slot]) throw ParseError("duplicate column '" + trim(name) + "'", line_no);
            seen[slot] = true;
            column_slot.push_back(slot);
        }
        for (std::size_t i = 0; i < kKpiAttributeCount; ++i)
            if (!seen[i])
                throw ParseError("missing column '" +
                                     std::string(kpi_attribute_name(static_cast<KpiAttribute>(i))) +
                                     "'",
                                 line_no);
    }

    std::vector<Row> raw_rows;
    bool saw_unclassified = false;
    while (get_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_fields(line, line_no);
        for (auto& f : fields) f = trim(f);
        reject_missing(fields, line_no);

        if (!has_header && column_slot.empty()) {
            // infer schema from the first row: 8 numeric, or 9 with diagnosis
            if (fields.size() == kKpiAttributeCount + 1) has_diagnosis = true;
            else if (fields.size() != kKpiAttributeCount)
                throw ParseError("expected " + std::to_string(kKpiAttributeCount) + " or " +
                                     std::to_string(kKpiAttributeCount + 1) + " columns, got " +
                                     std::to_string(fields.size()),
                                 line_no);
            for (std::size_t i = 0; i < fields.size(); ++i) column_slot.push_back(i);
        }
        if (fields.size() != column_slot.size())
            throw ParseError("row has " + std::to_string(fields.size()) + " values, expected " +
                                 std::to_string(column_slot.size()),
                             line_no);

        Row row(kKpiAttributeCount + (has_diagnosis ? 1 : 0), 0.0);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const std::size_t slot = column_slot[i];
            if (slot == kKpiAttributeCount) {
                const auto cls = parse_diagnosis_class(fields[i]);
                if (!cls)
                    throw ParseError("unknown diagnosis label '" + fields[i] + "'", line_no, i + 1);
                if (*cls == DiagnosisClass::Unclassified) saw_unclassified = true;
                row[slot] = std::string(to_string(*cls));
            } else {
                double v = 0;
                if (!parse_double(fields[i], v))
                    throw ParseError("expected a number, got '" + fields[i] + "'", line_no, i + 1);
                check_finite(v, line_no, i + 1);
                row[slot] = v;
            }
        }
        raw_rows.push_back(std::move(row));
    }

    Dataset d;
    d.relation_name = "Cell Performance";
    d.provenance = std::move(provenance);
    d.attributes = kpi_attributes(has_diagnosis, diagnosis_nominal_set(saw_unclassified));
    d.rows = std::move(raw_rows);
    return d;
}

Dataset read_csv_file(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return read_csv(in, has_header, path);
}

namespace {

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

} // namespace

void write_csv(const Dataset& d, std::ostream& out) {
    for (std::size_t i = 0; i < d.attributes.size(); ++i) {
        if (i) out << ",";
        out << d.attributes[i].name;
    }
    out << "\n";
    for (const auto& row : d.rows) {
        if (row.size() != d.attributes.size())
            throw ValidationError("row arity does not match schema");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            if (d.attributes[i].kind == AttributeKind::Numeric)
                out << format_double(std::get<double>(row[i]));
            else
                out << csv_quote(std::get<std::string>(row[i]));
        }
        out << "\n";
    }
}

void write_csv_file(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    write_csv(d, out);
}

// ---------------------------------------------------------------------------
// Split
// ---------------------------------------------------------------------------

SplitResult split(const Dataset& d, const SplitSpec& s) {
    if (d.rows.empty()) throw ValidationError("cannot split an empty dataset");
    if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0))
        throw ValidationError("train_fraction must be in (0,1)");

    const std::size_t n = d.rows.size();
    const auto n_train = static_cast<std::size_t>(
        std::llround(s.train_fraction * static_cast<double>(n)));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(s.seed);
    rng.shuffle(order);

    std::vector<bool> in_train(n, false);
    for (std::size_t i = 0; i < n_train && i < n; ++i) in_train[order[i]] = true;

    SplitResult result;
    result.train.relation_name = d.relation_name;
    result.train.attributes = d.attributes;
    result.train.provenance = d.provenance;
    result.test = result.train;
    for (std::size_t i = 0; i < n; ++i)
        (in_train[i] ? result.train : result.test).rows.push_back(d.rows[i]);
    return result;
}

// ---------------------------------------------------------------------------
// KPI record conversion
// ---------------------------------------------------------------------------

namespace {

struct KpiSchemaMap {
    // file attribute index -> KPI attribute index, or kKpiAttributeCount for diagnosis
    std::vector<std::size_t> slots;
    bool has_diagnosis = false;
};

std::optional<KpiSchemaMap> map_kpi_schema(const Dataset& d) {
    KpiSchemaMap m;
    std::vector<bool> seen(kKpiAttributeCount, false);
    for (const auto& attr : d.attributes) {
        if (normalize_name(attr.name) == "diagnosis") {
            if (m.has_diagnosis || attr.kind == AttributeKind::Numeric) return std::nullopt;
            m.has_diagnosis = true;
            m.slots.push_back(kKpiAttributeCount);
            continue;
        }
        const auto a = resolve_kpi_attribute(attr.name);
        if (!a || attr.kind != AttributeKind::Numeric) return std::nullopt;
        const auto idx = static_cast<std::size_t>(*a);
        if (seen[idx]) return std::nullopt;
        seen[idx] = true;
        m.slots.push_back(idx);
    }
    for (bool b : seen)
        if (!b) return std::nullopt;
    return m;
}

} // namespace

bool is_kpi_schema(const Dataset& d) {
    return map_kpi_schema(d).has_value();
}

std::vector<KpiRecord> to_kpi_records(const Dataset& d) {
    const auto m = map_kpi_schema(d);
    if (!m)
        throw ValidationError("dataset does not match the 8-attribute KPI schema"
                              " (plus optional diagnosis)");
    std::vector<KpiRecord> records;
    records.reserve(d.rows.size());
    for (std::size_t r = 0; r < d.rows.size(); ++r) {
        KpiRecord rec;
        rec.cell_id = "cell-" + std::to_string(r + 1);
        for (std::size_t i = 0; i < d.rows[r].size(); ++i) {
            const std::size_t slot = m->slots[i];
            if (slot == kKpiAttributeCount) {
                const auto& label = std::get<std::string>(d.rows[r][i]);
                const auto cls = parse_diagnosis_class(label);
                if (!cls)
                    throw ValidationError("row " + std::to_string(r + 1) +
                                          ": unknown diagnosis label '" + label + "'");
                rec.diagnosis = *cls;
            } else {
                rec.features[slot] = std::get<double>(d.rows[r][i]);
            }
        }
        validate_kpi_record(rec);
        records.push_back(std::move(rec));
    }
    return records;
}

Dataset from_kpi_records(const std::vector<KpiRecord>& records, std::string relation_name) {
    bool any_labeled = false;
    bool any_unlabeled = false;
    bool any_unclassified = false;
    for (const auto& r : records) {
        if (r.diagnosis) {
            any_labeled = true;
            if (*r.diagnosis == DiagnosisClass::Unclassified) any_unclassified = true;
        } else {
            any_unlabeled = true;
        }
    }
    if (any_labeled && any_unlabeled)
        throw ValidationError("records are mixed labeled/unlabeled");

    Dataset d;
    d.relation_name = std::move(relation_name);
    d.provenance = "generated";
    d.attributes = kpi_attributes(any_labeled, diagnosis_nominal_set(any_unclassified));
    d.rows.reserve(records.size());
    for (const auto& r : records) {
        validate_kpi_record(r);
        Row row;
        row.reserve(kKpiAttributeCount + (any_labeled ? 1 : 0));
        for (double f : r.features) row.emplace_back(f);
        if (any_labeled) row.emplace_back(std::string(to_string(*r.diagnosis)));
        d.rows.push_back(std::move(row));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Counter CSV
// ---------------------------------------------------------------------------

std::vector<CounterRecord> read_counters_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!get_line(in, line)) throw ParseError("empty counter file", 1);
    ++line_no;

    static const std::vector<std::string> expected = {"cellid", "ca", "cf", "cs",
                                                      "te",     "oe", "sdcchsa", "ssdcch"};
    const auto header = split_csv_fields(line, line_no);
    if (header.size() != expected.size())
        throw ParseError("counter header must have " + std::to_string(expected.size()) +
                             " columns",
                         line_no);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (normalize_name(header[i]) != expected[i])
            throw ParseError("expected column '" + expected[i] + "', got '" + trim(header[i]) +
                                 "'",
                             line_no, i + 1);
    }

    std::vector<CounterRecord> records;
    while (get_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_fields(line, line_no);
        if (fields.size() != expected.size())
            throw ParseError("row has " + std::to_string(fields.size()) + " values", line_no);
        CounterRecord c;
        c.cell_id = trim(fields[0]);
        double* dest[] = {&c.call_attempts, &c.call_failures,  &c.call_successes,
                          &c.traffic_in_erl, &c.traffic_out_erl, &c.sdcch_attempts,
                          &c.sdcch_successes};
        for (std::size_t i = 1; i < fields.size(); ++i) {
            if (!parse_double(trim(fields[i]), *dest[i - 1]))
                throw ParseError("expected a number, got '" + trim(fields[i]) + "'", line_no,
                                 i + 1);
        }
        records.push_back(std::move(c));
    }
    return records;
}

std::vector<CounterRecord> read_counters_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return read_counters_csv(in);
}

} // namespace celldiag
