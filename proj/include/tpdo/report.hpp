#pragma once

// JSON forms of the library's report types. Keys come out sorted, doubles as the shortest
// round-trip representation, infinities as "inf" / "-inf".

#include <json.hpp>
#include <string>
#include <vector>

#include "tpdo/experiments.hpp"
#include "tpdo/function_spaces.hpp"
#include "tpdo/kernels.hpp"
#include "tpdo/symbol_calculus.hpp"

namespace tpdo {

using Json = nlohmann::json;

Json number(double v);
/// Inverse of number(): accepts numbers and the strings "inf", "-inf".
double to_double(const Json& j);

Json to_json(const ClassParams& c);
Json to_json(const calculus::ClassEstimate& e);
Json to_json(const EffectiveOrder& e);
Json to_json(const KernelMatrix& k);  // metadata only
Json to_json(const KernelDecayReport& r);
Json to_json(const LogBoundReport& r);
Json to_json(const SigmaEstimateReport& r);
Json to_json(const NormValue& v);
Json to_json(const CZDecomposition& d);
Json to_json(const NormEstimate& e);  // witness summarized, not dumped
Json to_json(const ThresholdSweepRecord& r);
Json to_json(const TruncationResult& r);
Json to_json(const WeakTypeReport& r);
Json to_json(const ExperimentReport& r);
Json to_json(const AdmissibilityReport& r);
Json to_json(const Weak11Hypothesis& h);

struct ReportEnvelope {
  std::string tool = "tpdo";
  std::string version;
  std::string timestamp;  // ISO 8601, UTC
  std::string command;
  Json config;
  Json payload;
  std::vector<std::string> provenance;
};

Json to_json(const ReportEnvelope& e);
ReportEnvelope envelope_from_json(const Json& j);
std::string utc_timestamp();

}  // namespace tpdo
