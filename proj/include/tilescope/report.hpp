#pragma once

#include <string>

#include <json.hpp>

#include "tilescope/analysis.hpp"
#include "tilescope/geometry.hpp"
#include "tilescope/spectral.hpp"
#include "tilescope/substitution.hpp"

namespace tilescope {

using nlohmann::json;

// {"value": v, "method": m}; m is one of exact, float, fit, raster
json tagged(double v, const char* method);
json tagged(const std::string& v, const char* method);

json block_validation(const SubstitutionSystem& sys, const ValidationReport& v);
json block_volumes(const VolumeReport& v);
json block_ifs(const IfsResult& r, double h);
json block_frequency(const FrequencyEstimate& f);
json block_tile_frequencies(const std::vector<double>& r, const TileGeometry& geo);
json block_flc(const FlcScan& s);
json block_periods(const SubstitutionSystem& sys, const std::vector<PeriodCandidate>& p);
json block_meyer(const MeyerScan& m);
json block_rigidity(const SubstitutionSystem& sys, const RigidityVerdict& v);
json block_pisot(const SubstitutionSystem& sys);
json block_eigen(const SubstitutionSystem& sys, const EigenvalueVerdict& v, const AlphaFamily& fam);
json block_cylinders(const CylinderSet& set, const PartitionCheck& pc, const BirkhoffCurve* curve);
json block_mixing(const SubstitutionSystem& sys, const SymbolicVector& z, const MixingBound& b);
json block_weak_mixing(const WeakMixingReport& w);
json block_audit();

// every report carries schema_version; output is byte-stable for equal input
json new_report(const std::string& system, const std::string& command);
std::string dump_report(const json& j);

}  // namespace tilescope
