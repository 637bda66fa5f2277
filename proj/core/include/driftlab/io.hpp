#pragma once

#include <string>

#include "driftlab/field.hpp"
#include "driftlab/fields.hpp"
#include "driftlab/geometry.hpp"
#include "driftlab/norms.hpp"
#include "json.hpp"

namespace driftlab::io {

/// Rebuild coefficient fields from their JSON descriptors (the inverse of
/// the descriptor surfaces; no closures cross this boundary).
fields::EllipticTensor tensor_from_json(const nlohmann::json& j);
fields::DriftField drift_from_json(const nlohmann::json& j);

/// Region + grid descriptor: kind, center, R, lambda, theta, h, tau.
nlohmann::json region_descriptor(const geom::Grid& g);
nlohmann::json region_descriptor(const geom::Ball& b);
nlohmann::json region_descriptor(const geom::Cylinder& c);

nlohmann::json norm_report_json(const norms::NormReport& rep);

/// Node coordinates + value, one row per node (per slab for space-time).
void export_csv(const DiscreteField& f, const std::string& path);
void export_csv(const SpaceTimeField& f, const std::string& path);

/// Compact binary layout: magic "DLB1", then int32 dim, int32 steps,
/// float64 h, float64 tau, float64 lo[3], int32 cells[3], int32 interior,
/// int32 boundary, then per slab the float64 node values in id order.
void export_binary(const DiscreteField& f, const std::string& path);
void export_binary(const SpaceTimeField& f, const std::string& path);

}  // namespace driftlab::io
