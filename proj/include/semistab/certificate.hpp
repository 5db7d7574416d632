#pragma once

#include "semistab/decomposition.hpp"
#include "semistab/envelope.hpp"
#include "semistab/validator.hpp"

#include "json.hpp"

namespace semistab {

inline constexpr const char* kToolVersion = "semistab 0.1.0";

struct CertifyOptions {
    double halfplane_vertex = 1.0;  // omega for the base half-plane estimate
    std::vector<double> kappas{0.25, 0.5, 0.75};
    std::string route = "auto";     // "auto" | "semisimple" | "simple-eigenvalue"
    double quadrature_tol = 1e-10;
};

// The full constant pipeline for one family: base sector certificate via the
// half-plane estimate, the uniform family certificate, the decomposition
// constants, and one envelope per kappa.
struct CertifiedFamily {
    double nu = 0.0;
    GapStructureReport gap_structure;
    SectorCert base_cert;
    EnvelopeIngredients ingredients;
    std::vector<DecayEnvelope> envelopes;
    std::string route;  // "semisimple" or "simple-eigenvalue"
};

CertifiedFamily certify_family(const PerturbationFamily& fam, double nu,
                               const CertifyOptions& opts = {});

// Certificate document and its round-trip back into envelopes.
nlohmann::json certificate_to_json(const CertifiedFamily& cert,
                                   std::uint64_t problem_hash);
std::vector<DecayEnvelope> envelopes_from_json(const nlohmann::json& doc);

std::uint64_t fnv1a_hash(const std::string& bytes);

// CSV with header alpha,t,measured_norm,envelope,ratio; shortest round-trip
// decimal formatting, LF endings.
std::string report_to_csv(const ValidationReport& rep);
std::string format_double(double v);

}  // namespace semistab
