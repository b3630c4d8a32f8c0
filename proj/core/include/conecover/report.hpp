#pragma once

#include <string>

#include "json.hpp"

#include "conecover/branching.hpp"
#include "conecover/generating.hpp"
#include "conecover/rwdcre.hpp"
#include "conecover/spectral.hpp"
#include "conecover/walk.hpp"

namespace conecover {

using Json = nlohmann::ordered_json;

// Deterministic JSON text: insertion-ordered keys, doubles printed with 17
// significant digits (round-trip exact), 2-space indentation.
std::string dump_json(const Json& j, int indent = 2);

// Report envelope: tool version, spec hash, seed and effective tolerances
// ride on every document.
Json report_envelope(const std::string& subcommand, const std::string& spec_hash,
                     std::uint64_t seed, const Json& tolerances);

Json to_json(const GfSolution& sol);
Json to_json(const GfBracket& bracket);
Json to_json(const SpectralReport& rep);
Json to_json(const ErgodicityReport& rep);
Json to_json(const CwCertificate& cert);
Json to_json(const LevelCounts& lc);
Json to_json(const WalkRun& run);
Json to_json(const RecurrenceEvidence& ev);
Json to_json(const EntropySpeedEstimate& est);
Json to_json(const CoupleReport& rep);
Json to_json(const RwdcreReport& rep);
Json error_report(const Error& err);

// Compact sweep/growth rows.
std::string levels_tsv(const LevelCounts& lc);
std::string gf_tsv_header();
std::string gf_tsv_row(const std::string& spec_id, const GfSolution& sol);

}  // namespace conecover
