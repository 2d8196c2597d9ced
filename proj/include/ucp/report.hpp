#pragma once

#include <string>

#include <json.hpp>

#include "ucp/bounds.hpp"
#include "ucp/geometry.hpp"
#include "ucp/spectral.hpp"
#include "ucp/stochastic.hpp"
#include "ucp/verify.hpp"

namespace ucp::report {

nlohmann::json to_json(const bounds::BoundReport& r);
nlohmann::json to_json(const stochastic::MCEstimate& e);
nlohmann::json to_json(const stochastic::HitAndRunResult& r);
nlohmann::json to_json(const stochastic::SemigroupGapResult& r);
nlohmann::json to_json(const DensenessCertificate& c);
nlohmann::json to_json(const Skeleton& s);
nlohmann::json to_json(const CurveResult& c);
nlohmann::json to_json(const spectral::SpectralResult& r); // scalars only, no vectors
nlohmann::json to_json(const UCPReport& r);

// per-eigenvector CSV rows "lambda,mass_ratio,pass"
std::string rows_csv(const UCPReport& r);

} // namespace ucp::report
