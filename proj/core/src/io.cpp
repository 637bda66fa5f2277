#include "driftlab/io.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace driftlab::io {

using geom::Ball;
using geom::Cylinder;
using geom::Grid;
using nlohmann::json;

namespace {

std::array<double, 3> triple(const json& j, const char* key,
                             std::array<double, 3> fallback = {0, 0, 0}) {
  if (!j.contains(key)) return fallback;
  std::array<double, 3> out = fallback;
  const auto& arr = j.at(key);
  for (std::size_t d = 0; d < std::min<std::size_t>(3, arr.size()); ++d) out[d] = arr[d];
  return out;
}

}  // namespace

fields::EllipticTensor tensor_from_json(const json& j) {
  const std::string kind = j.value("kind", "identity");
  const int dim = j.value("dim", 2);
  if (kind == "identity") return fields::make_identity_tensor(dim);
  if (kind == "diagonal") {
    return fields::make_diagonal_tensor(dim, triple(j, "base", {1, 1, 1}), triple(j, "amp"),
                                        triple(j, "freq"), triple(j, "phase"),
                                        j.value("nu", 1.0));
  }
  if (kind == "rotation_mixed") {
    const auto mu = triple(j, "mu", {1, 1, 1});
    return fields::make_rotation_mixed_tensor(dim, mu[0], mu[1], mu[2], j.value("angle", 0.0),
                                              j.value("wobble", 0.0), j.value("nu", 1.0));
  }
  throw std::invalid_argument("unknown tensor kind: " + kind);
}

fields::DriftField drift_from_json(const json& j) {
  const std::string kind = j.value("kind", "zero");
  const int dim = j.value("dim", 2);
  fields::DriftField b;
  if (kind == "zero") {
    b = fields::make_zero_drift(dim);
  } else if (kind == "constant") {
    const auto v = triple(j, "v");
    b = fields::make_constant_drift({v[0], v[1], v[2]}, dim);
  } else if (kind == "stream2d") {
    const auto k = triple(j, "k", {1, 1, 0});
    b = fields::make_stream2d_drift(j.value("amp", 1.0), k[0], k[1]);
  } else if (kind == "stream2d_compact") {
    b = fields::make_compact_stream2d_drift(j.value("amp", 1.0), j.value("r0", 1.0));
  } else if (kind == "potential3d") {
    const auto w = triple(j, "omega");
    b = fields::make_potential3d_drift({w[0], w[1], w[2]}, j.value("sink", 0.0));
  } else if (kind == "radial") {
    b = fields::make_radial_drift(j.value("kappa", 0.0), dim);
  } else if (kind == "axisymmetric") {
    const std::string bg = j.value("background", "none");
    const auto kindv = bg == "rigid"      ? fields::SwirlBackground::Rigid
                       : bg == "gaussian" ? fields::SwirlBackground::Gaussian
                                          : fields::SwirlBackground::None;
    b = fields::make_axisymmetric_drift(j.value("eps", -1.0), kindv, j.value("bg_amp", 0.0));
  } else {
    throw std::invalid_argument("unknown drift kind: " + kind);
  }
  const double scale = j.value("scale", 1.0);
  return scale == 1.0 ? b : b.rescaled(scale);
}

json region_descriptor(const Ball& b) {
  return json{{"kind", "ball"},
              {"center", {b.center[0], b.center[1], b.center[2]}},
              {"R", b.radius},
              {"dim", b.dim}};
}

json region_descriptor(const Cylinder& c) {
  return json{{"kind", "cylinder"},
              {"center", {c.center[0], c.center[1], c.center[2]}},
              {"apex_time", c.apex_time},
              {"R", c.radius},
              {"lambda", c.lambda},
              {"theta", c.theta},
              {"dim", c.dim}};
}

json region_descriptor(const Grid& g) {
  json j = g.ball() ? region_descriptor(*g.ball()) : region_descriptor(*g.cylinder());
  j["h"] = g.h();
  if (g.spacetime()) j["tau"] = g.tau();
  return j;
}

json norm_report_json(const norms::NormReport& rep) {
  return json{{"value", rep.value},
              {"maximizer_center",
               {rep.maximizer_center[0], rep.maximizer_center[1], rep.maximizer_center[2]}},
              {"maximizer_radius", rep.maximizer_radius},
              {"maximizer_time", rep.maximizer_time},
              {"resolution", rep.resolution}};
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

void write_header(std::ofstream& out, const Grid& g, int slabs) {
  out.write("DLB1", 4);
  const std::int32_t dim = g.dim(), steps = slabs;
  const double h = g.h(), tau = g.tau();
  const geom::Point lo = g.box_lo();
  const auto cells = g.cells();
  const std::int32_t ni = g.interior_count(), nb = g.boundary_count();
  out.write(reinterpret_cast<const char*>(&dim), 4);
  out.write(reinterpret_cast<const char*>(&steps), 4);
  out.write(reinterpret_cast<const char*>(&h), 8);
  out.write(reinterpret_cast<const char*>(&tau), 8);
  out.write(reinterpret_cast<const char*>(lo.data()), 24);
  for (int d = 0; d < 3; ++d) {
    const std::int32_t c = cells[d];
    out.write(reinterpret_cast<const char*>(&c), 4);
  }
  out.write(reinterpret_cast<const char*>(&ni), 4);
  out.write(reinterpret_cast<const char*>(&nb), 4);
}

}  // namespace

void export_csv(const DiscreteField& f, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "x,y,z,value\n";
  const Grid& g = *f.grid;
  for (int id = 0; id < g.node_count(); ++id) {
    const geom::Point x = g.pos(id);
    out << json(x[0]).dump() << ',' << json(x[1]).dump() << ',' << json(x[2]).dump() << ','
        << json(f.v[id]).dump() << '\n';
  }
}

void export_csv(const SpaceTimeField& f, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "x,y,z,t,value\n";
  const Grid& g = *f.grid;
  for (int k = 0; k <= g.steps(); ++k) {
    const double t = g.slab_time(k);
    for (int id = 0; id < g.node_count(); ++id) {
      const geom::Point x = g.pos(id);
      out << json(x[0]).dump() << ',' << json(x[1]).dump() << ',' << json(x[2]).dump() << ','
          << json(t).dump() << ',' << json(f.slabs[k][id]).dump() << '\n';
    }
  }
}

void export_binary(const DiscreteField& f, const std::string& path) {
  std::ofstream out = open_out(path);
  const Grid& g = *f.grid;
  write_header(out, g, 0);
  out.write(reinterpret_cast<const char*>(f.v.data()),
            static_cast<std::streamsize>(f.v.size() * 8));
}

void export_binary(const SpaceTimeField& f, const std::string& path) {
  std::ofstream out = open_out(path);
  const Grid& g = *f.grid;
  write_header(out, g, g.steps());
  for (const auto& slab : f.slabs)
    out.write(reinterpret_cast<const char*>(slab.data()),
              static_cast<std::streamsize>(slab.size() * 8));
}

}  // namespace driftlab::io
