#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "es1p1/algorithm.hpp"

namespace es::serialize {

// Number formatting shared by all CSV writers: shortest round-trip form, so
// equal values always produce equal bytes.
std::string csv_num(double v);

nlohmann::ordered_json to_json(const EsParams& params);
EsParams es_params_from_json(const nlohmann::json& j, const EsParams& base = {});

nlohmann::ordered_json to_json(const StoppingRule& stopping);
StoppingRule stopping_from_json(const nlohmann::json& j, const StoppingRule& base = {});

nlohmann::ordered_json to_json(const StepRecord& record);
nlohmann::ordered_json trace_meta_json(const RunTrace& trace);

// One JSON object per line: first the trace metadata, then records in order.
void write_trace_jsonl(const RunTrace& trace, std::ostream& out);

// Header: t,m0,...,m{d-1},sigma,f,accepted — the state entering iteration t.
void write_trace_csv(const RunTrace& trace, std::ostream& out);

// Canonical dump: 2-space indent, '\n'-terminated; byte-identical for equal
// documents.
std::string dump(const nlohmann::ordered_json& j);

}  // namespace es::serialize
