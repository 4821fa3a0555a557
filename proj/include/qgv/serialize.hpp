#pragma once

// JSON interchange for axiom reports, spectral models, reconstructed spaces,
// correlator-family descriptors, and test-function bases. Configs stay as
// flat text; every machine-readable artifact is JSON, with large matrices in
// a binary sidecar referenced by content hash.

#include <string>

#include <json.hpp>

#include "qgv/axioms.hpp"
#include "qgv/continuation.hpp"
#include "qgv/correlator.hpp"
#include "qgv/lattice.hpp"
#include "qgv/reconstruction.hpp"

namespace qgv {

// {axiom, family, quantities{}, tolerance, sigma, verdict, reason,
//  provenance_hash}
nlohmann::json report_to_json(const AxiomReport& rep);
AxiomReport report_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const SpectralModel& model);
SpectralModel model_from_json(const nlohmann::json& j);

// closed-form functions only; grid data travels with its ensemble instead
nlohmann::json test_function_to_json(const TestFunction& f);
TestFunction test_function_from_json(const nlohmann::json& j);

nlohmann::json sequence_vector_to_json(const SequenceVector& v);
SequenceVector sequence_vector_from_json(const nlohmann::json& j);

// family descriptors are construction recipes: kind tags plus parameters.
// Lattice families reference their ensemble file, validated against the
// recorded content hash on load.
//   {"kind":"free_scalar","mass":m,"degree_cap":n}
//   {"kind":"maxwell","degree_cap":n}
//   {"kind":"covariant_photon"}
//   {"kind":"fermion_toy","mass":m}
//   {"kind":"sign_flipped"|"time_reflected"|"constant_shift", "base":{...}, ...}
//   {"kind":"lattice","ensemble":path,"ensemble_hash":hex,
//    "observable":"plaquette"|"F2"|"phi2","label":str}
FamilyPtr family_from_json(const nlohmann::json& j);

// writes <path> (JSON descriptor) and <path>.bin (little-endian doubles for
// gram, quotient, inner, omega), hash-linked; family_desc is echoed so a
// report can be traced to its construction recipe
void save_physical(const PhysicalSpace& ps, const std::string& path,
                   const nlohmann::json& family_desc = nlohmann::json::object());

// rebuilds numerical content and basis vectors; the live family handle is
// supplied by the caller (descriptors identify it, they do not own it)
PhysicalSpace load_physical(const std::string& path, const FamilyPtr& fam);

}  // namespace qgv
