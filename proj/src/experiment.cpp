#include "dcar/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dcar/errors.hpp"
#include "dcar/fbp.hpp"
#include "dcar/io.hpp"
#include "dcar/metrics.hpp"

namespace dcar {

namespace {

using json = nlohmann::json;

/// Typed access to one config object that remembers which keys were read, so
/// leftovers can be reported as unknown.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      throw ConfigParseError("'" + path_ + "' must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T get(const std::string& key, const T& fallback) {
    if (!j_.contains(key)) return fallback;
    return require<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key))
      throw ConfigParseError("missing '" + name(key) + "'");
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigParseError("'" + name(key) + "' has the wrong type");
    }
  }

  Block child(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key))
      throw ConfigParseError("missing '" + name(key) + "'");
    return Block(j_.at(key), name(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string name(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key))
        throw ConfigParseError("unknown key '" + name(key) + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::pair<double, double> pairOf(Block& b, const std::string& key) {
  const auto v = b.require<std::vector<double>>(key);
  if (v.size() != 2)
    throw ConfigParseError("'" + b.name(key) + "' must hold two numbers");
  return {v[0], v[1]};
}

EllipseSpec parseEllipse(const json& j, const std::string& path) {
  Block b(j, path);
  EllipseSpec e;
  std::tie(e.cx, e.cy) = pairOf(b, "center_mm");
  std::tie(e.ax, e.ay) = pairOf(b, "axes_mm");
  e.rotationDeg = b.get<double>("rotation_deg", 0.0);
  e.delta = b.require<double>("delta_mu");
  b.finish();
  return e;
}

Corruption parseCorruption(const json& j, const std::string& path) {
  Block b(j, path);
  Corruption c;
  std::tie(c.cx, c.cy) = pairOf(b, "center_mm");
  std::tie(c.ax, c.ay) = pairOf(b, "axes_mm");
  c.rotationDeg = b.get<double>("rotation_deg", 0.0);
  c.offsetHu = b.require<double>("offset_hu");
  b.finish();
  return c;
}

PhantomKind parsePhantomKind(const std::string& s) {
  if (s == "ellipses") return PhantomKind::Ellipses;
  if (s == "shepp-logan") return PhantomKind::SheppLogan;
  if (s == "abdomen") return PhantomKind::Abdomen;
  if (s == "random") return PhantomKind::Random;
  if (s == "file") return PhantomKind::File;
  throw ValidationError("phantom.kind: unknown kind '" + s + "'");
}

std::string phantomKindName(PhantomKind k) {
  switch (k) {
    case PhantomKind::Ellipses: return "ellipses";
    case PhantomKind::SheppLogan: return "shepp-logan";
    case PhantomKind::Abdomen: return "abdomen";
    case PhantomKind::Random: return "random";
    case PhantomKind::File: return "file";
  }
  return "unknown";
}

std::filesystem::path resolvePath(const std::string& p,
                                  const std::filesystem::path& baseDir) {
  std::filesystem::path path(p);
  if (path.is_relative() && !baseDir.empty()) return baseDir / path;
  return path;
}

json ellipseJson(const EllipseSpec& e) {
  return {{"center_mm", {e.cx, e.cy}},
          {"axes_mm", {e.ax, e.ay}},
          {"rotation_deg", e.rotationDeg},
          {"delta_mu", e.delta}};
}

json toJson(const ExperimentConfig& c) {
  json j;
  const auto& g = c.geometry;
  j["geometry"] = {{"sid_mm", g.sid},         {"sdd_mm", g.sdd},
                   {"n_bins", g.nBins},       {"bin_size_mm", g.binSize},
                   {"start_deg", g.startDeg}, {"end_deg", g.endDeg},
                   {"step_deg", g.stepDeg}};
  j["grid"] = {{"nx", c.grid.nx},
               {"ny", c.grid.ny},
               {"dx_mm", c.grid.dx},
               {"dy_mm", c.grid.dy}};
  json ph = {{"kind", phantomKindName(c.phantom.kind)}};
  switch (c.phantom.kind) {
    case PhantomKind::Ellipses: {
      json list = json::array();
      for (const auto& e : c.phantom.ellipses) list.push_back(ellipseJson(e));
      ph["ellipses"] = list;
      break;
    }
    case PhantomKind::SheppLogan: ph["radius_mm"] = c.phantom.radiusMm; break;
    case PhantomKind::Random: ph["seed"] = c.phantom.seed; break;
    case PhantomKind::File: ph["path"] = c.phantom.path; break;
    case PhantomKind::Abdomen: break;
  }
  j["phantom"] = ph;
  j["noise"] = {{"enabled", c.noise.enabled},
                {"i0", c.noise.i0},
                {"seed", c.noise.seed}};
  j["measured_range"] = {{"start_deg", c.measuredStartDeg},
                         {"end_deg", c.measuredEndDeg}};
  if (c.hasPrior) {
    json pr = {{"kind", priorKindName(c.prior.kind)}};
    if (c.prior.kind == PriorKind::File) pr["path"] = c.prior.path;
    if (c.prior.kind == PriorKind::OracleCorrupted) {
      json list = json::array();
      for (const auto& k : c.prior.corruptions)
        list.push_back({{"center_mm", {k.cx, k.cy}},
                        {"axes_mm", {k.ax, k.ay}},
                        {"rotation_deg", k.rotationDeg},
                        {"offset_hu", k.offsetHu}});
      pr["corruptions"] = list;
    }
    j["prior"] = pr;
  }
  const auto& s = c.solver;
  j["solver"] = {{"e1", s.e1},
                 {"e2", s.e2},
                 {"lambda", s.lambda},
                 {"epsilon_hu", s.epsilonHu},
                 {"outer_iterations", s.outerIterations},
                 {"tv_steps_per_outer", s.tvStepsPerOuter},
                 {"line_search",
                  {{"initial_step", s.lineSearch.initialStep},
                   {"shrink", s.lineSearch.shrink},
                   {"sufficient_decrease", s.lineSearch.sufficientDecrease},
                   {"max_backtracks", s.lineSearch.maxBacktracks}}},
                 {"enforce_nonnegativity", s.enforceNonnegativity}};
  j["method"] = methodName(c.method);
  j["output_dir"] = c.outputDir.string();
  j["export"] = {{"mu_water", c.exportBlock.scale.muWater},
                 {"window_hu",
                  {c.exportBlock.windowLowHu, c.exportBlock.windowHighHu}}};
  return j;
}

}  // namespace

FanBeamGeometry GeometryBlock::build() const {
  return makeShortScanGeometry(sid, sdd, nBins, binSize, startDeg, endDeg,
                               stepDeg);
}

std::string methodName(Method m) {
  switch (m) {
    case Method::Fbp: return "fbp";
    case Method::SartWtv: return "sart-wtv";
    case Method::Dcar: return "dcar";
  }
  return "unknown";
}

Method parseMethod(const std::string& s) {
  if (s == "fbp") return Method::Fbp;
  if (s == "sart-wtv") return Method::SartWtv;
  if (s == "dcar") return Method::Dcar;
  throw ValidationError("method: unknown method '" + s + "'");
}

void ExperimentConfig::validate() const {
  const FanBeamGeometry g = geometry.build();
  grid.validate();
  partitionAngles(g, measuredStartDeg, measuredEndDeg);
  for (const auto& e : phantom.ellipses) e.validate();
  if (phantom.kind == PhantomKind::SheppLogan && !(phantom.radiusMm > 0.0))
    throw ValidationError("phantom.radius_mm must be > 0");
  if (phantom.kind == PhantomKind::File && phantom.path.empty())
    throw ValidationError("phantom.path is required for kind=file");
  if (noise.enabled) NoiseModel{noise.i0, noise.seed}.validate();
  solver.validate();
  exportBlock.scale.validate();
  if (!(exportBlock.windowHighHu > exportBlock.windowLowHu))
    throw ValidationError("export.window_hu must be increasing");
  if (method == Method::Dcar && !hasPrior)
    throw ValidationError("prior block is required for method=dcar");
  if (hasPrior && prior.kind == PriorKind::File && prior.path.empty())
    throw ValidationError("prior.path is required for kind=file");
}

ExperimentConfig parseExperimentConfig(const std::string& text,
                                       const std::filesystem::path& baseDir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigParseError(std::string("config is not valid JSON: ") + e.what());
  }
  Block top(root, "");
  ExperimentConfig c;

  {
    Block b = top.child("geometry");
    auto& g = c.geometry;
    g.sid = b.get("sid_mm", g.sid);
    g.sdd = b.get("sdd_mm", g.sdd);
    g.nBins = b.get("n_bins", g.nBins);
    g.binSize = b.get("bin_size_mm", g.binSize);
    g.startDeg = b.get("start_deg", g.startDeg);
    g.endDeg = b.get("end_deg", g.endDeg);
    g.stepDeg = b.get("step_deg", g.stepDeg);
    b.finish();
  }
  {
    Block b = top.child("grid");
    c.grid.nx = b.get("nx", c.grid.nx);
    c.grid.ny = b.get("ny", c.grid.ny);
    c.grid.dx = b.get("dx_mm", c.grid.dx);
    c.grid.dy = b.get("dy_mm", c.grid.dy);
    b.finish();
  }
  {
    Block b = top.child("phantom");
    c.phantom.kind = parsePhantomKind(b.require<std::string>("kind"));
    if (b.has("ellipses")) {
      const json& list = b.raw("ellipses");
      if (!list.is_array())
        throw ConfigParseError("'phantom.ellipses' must be an array");
      for (std::size_t i = 0; i < list.size(); ++i)
        c.phantom.ellipses.push_back(
            parseEllipse(list[i], "phantom.ellipses[" + std::to_string(i) + "]"));
    }
    c.phantom.seed = b.get<std::uint64_t>("seed", 0);
    if (b.has("path"))
      c.phantom.path =
          resolvePath(b.require<std::string>("path"), baseDir).string();
    c.phantom.radiusMm = b.get("radius_mm", c.phantom.radiusMm);
    b.finish();
  }
  if (top.has("noise")) {
    Block b = top.child("noise");
    c.noise.enabled = b.get("enabled", c.noise.enabled);
    c.noise.i0 = b.get("i0", c.noise.i0);
    c.noise.seed = b.get<std::uint64_t>("seed", c.noise.seed);
    b.finish();
  }
  {
    Block b = top.child("measured_range");
    c.measuredStartDeg = b.require<double>("start_deg");
    c.measuredEndDeg = b.require<double>("end_deg");
    b.finish();
  }
  c.method = parseMethod(top.require<std::string>("method"));
  if (top.has("prior")) {
    Block b = top.child("prior");
    c.hasPrior = true;
    c.prior.kind = parsePriorKind(b.require<std::string>("kind"));
    if (b.has("path"))
      c.prior.path = resolvePath(b.require<std::string>("path"), baseDir).string();
    if (b.has("corruptions")) {
      const json& list = b.raw("corruptions");
      if (!list.is_array())
        throw ConfigParseError("'prior.corruptions' must be an array");
      for (std::size_t i = 0; i < list.size(); ++i)
        c.prior.corruptions.push_back(parseCorruption(
            list[i], "prior.corruptions[" + std::to_string(i) + "]"));
    }
    b.finish();
  }
  c.solver.outerIterations = c.method == Method::SartWtv ? 100 : 50;
  if (top.has("solver")) {
    Block b = top.child("solver");
    auto& s = c.solver;
    s.e1 = b.get("e1", s.e1);
    s.e2 = b.get("e2", s.e2);
    s.lambda = b.get("lambda", s.lambda);
    s.epsilonHu = b.get("epsilon_hu", s.epsilonHu);
    s.outerIterations = b.get("outer_iterations", s.outerIterations);
    s.tvStepsPerOuter = b.get("tv_steps_per_outer", s.tvStepsPerOuter);
    if (b.has("line_search")) {
      Block ls = b.child("line_search");
      s.lineSearch.initialStep = ls.get("initial_step", s.lineSearch.initialStep);
      s.lineSearch.shrink = ls.get("shrink", s.lineSearch.shrink);
      s.lineSearch.sufficientDecrease =
          ls.get("sufficient_decrease", s.lineSearch.sufficientDecrease);
      s.lineSearch.maxBacktracks =
          ls.get("max_backtracks", s.lineSearch.maxBacktracks);
      ls.finish();
    }
    s.enforceNonnegativity =
        b.get("enforce_nonnegativity", s.enforceNonnegativity);
    b.finish();
  }
  c.outputDir = top.get<std::string>("output_dir", "");
  if (!c.outputDir.empty()) c.outputDir = resolvePath(c.outputDir.string(), baseDir);
  if (top.has("export")) {
    Block b = top.child("export");
    c.exportBlock.scale.muWater =
        b.get("mu_water", c.exportBlock.scale.muWater);
    if (b.has("window_hu"))
      std::tie(c.exportBlock.windowLowHu, c.exportBlock.windowHighHu) =
          pairOf(b, "window_hu");
    b.finish();
  }
  c.solver.scale = c.exportBlock.scale;
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig loadExperimentConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parseExperimentConfig(ss.str(), path.parent_path());
}

std::string dumpExperimentConfig(const ExperimentConfig& config) {
  return toJson(config).dump(2);
}

ImageGrid buildPhantom(const ExperimentConfig& c) {
  switch (c.phantom.kind) {
    case PhantomKind::Ellipses: return renderPhantom(c.phantom.ellipses, c.grid);
    case PhantomKind::SheppLogan:
      return renderPhantom(sheppLoganSpecs(c.phantom.radiusMm,
                                           c.exportBlock.scale.muWater),
                           c.grid);
    case PhantomKind::Abdomen: return renderPhantom(abdomenSpecs(), c.grid);
    case PhantomKind::Random: return randomAbdomenPhantom(c.phantom.seed, c.grid);
    case PhantomKind::File: {
      ImageGrid image = io::readImage(c.phantom.path, c.exportBlock.scale);
      if (!(image.spec() == c.grid))
        throw ValidationError("phantom file does not match the grid block");
      return image;
    }
  }
  throw ValidationError("unhandled phantom kind");
}

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

ExperimentOutput runExperiment(const ExperimentConfig& config) {
  config.validate();
  const FanBeamGeometry geometry = config.geometry.build();
  const AngularPartition partition =
      partitionAngles(geometry, config.measuredStartDeg, config.measuredEndDeg);
  const HuScale& scale = config.exportBlock.scale;

  ImageGrid truth = buildPhantom(config);
  Sinogram measured = forwardProject(truth, geometry, partition.measured);
  if (config.noise.enabled)
    measured = addPoissonNoise(measured, {config.noise.i0, config.noise.seed});

  const ImageGrid fbp =
      fbpReconstruct(measured, geometry, partition.measured, config.grid);

  ExperimentOutput out{truth, measured, fbp, std::nullopt, {}, {}};
  switch (config.method) {
    case Method::Fbp: break;
    case Method::SartWtv: {
      auto r = sartWtvBaseline(measured, config.grid, geometry, partition,
                               config.solver, &truth);
      out.reconstruction = std::move(r.image);
      out.report = std::move(r.report);
      break;
    }
    case Method::Dcar: {
      PriorContext ctx{&measured, &geometry, &partition, config.grid, &truth,
                       scale};
      out.prior = resolvePrior(config.prior, ctx);
      auto r = dcarReconstruct(measured, *out.prior, geometry, partition,
                               config.solver, &truth);
      out.reconstruction = std::move(r.image);
      out.report = std::move(r.report);
      break;
    }
  }
  if (!out.reconstruction.allFinite())
    throw NumericError("reconstruction contains non-finite values");

  RunSummary& s = out.summary;
  s.method = methodName(config.method);
  s.rmseHu = rmseHu(out.reconstruction, truth, scale);
  s.fbpRmseHu = rmseHu(fbp, truth, scale);
  if (out.prior) s.priorRmseHu = rmseHu(*out.prior, truth, scale);
  const ResidualStats rs = residualStats(out.reconstruction, measured, geometry,
                                         partition.measured, config.solver.e1);
  s.measuredResidualRms = rs.rms;
  s.measuredResidualMaxAbs = rs.maxAbs;
  s.measuredFractionAboveE1 = rs.fractionAbove;
  s.iterations = static_cast<int>(out.report.iterations.size());

  if (!config.outputDir.empty()) {
    const auto& dir = config.outputDir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const auto& ex = config.exportBlock;
    io::writeImage(dir / "ground_truth.raw", truth);
    io::writePng(dir / "ground_truth.png", truth, scale, ex.windowLowHu, ex.windowHighHu);
    io::writeSinogram(dir / "measured_sino.raw", measured);
    io::writeImage(dir / "fbp.raw", fbp);
    io::writeImage(dir / "reconstruction.raw", out.reconstruction);
    io::writePng(dir / "reconstruction.png", out.reconstruction, scale,
                 ex.windowLowHu, ex.windowHighHu);
    if (out.prior) {
      io::writeImage(dir / "prior.raw", *out.prior);
      io::writePng(dir / "prior.png", *out.prior, scale, ex.windowLowHu,
                   ex.windowHighHu);
    }
    if (config.method != Method::Fbp)
      io::writeText(dir / "report.csv", formatReportCsv(out.report));
    io::writeText(dir / "summary.json", summaryJson(config, s));
  }
  return out;
}

std::vector<RunSummary> compareExperiments(
    const std::vector<ExperimentConfig>& configs) {
  if (configs.empty()) throw ValidationError("compare: no configs given");
  const json first = toJson(configs.front());
  for (std::size_t i = 1; i < configs.size(); ++i) {
    const json other = toJson(configs[i]);
    for (const char* key : {"phantom", "geometry", "grid"})
      if (other[key] != first[key])
        throw ValidationError("compare: config " + std::to_string(i) +
                              " uses a different " + key + " block");
  }
  std::vector<RunSummary> rows;
  for (const auto& c : configs) rows.push_back(runExperiment(c).summary);
  return rows;
}

std::string formatReportCsv(const ReconReport& report) {
  std::ostringstream os;
  os << "iteration,measured_residual_rms,prior_residual_rms,wtv_value,rmse_hu\n";
  for (const auto& r : report.iterations)
    os << r.iteration << ',' << number(r.measuredResidualRms) << ','
       << number(r.priorResidualRms) << ',' << number(r.wtvValue) << ','
       << number(r.rmseHu) << '\n';
  return os.str();
}

std::string formatSummaryTable(const std::vector<RunSummary>& rows) {
  std::ostringstream os;
  os << "method,rmse_hu,prior_rmse_hu,fbp_rmse_hu,measured_residual_rms,"
        "measured_residual_max_abs,measured_fraction_above_e1,iterations\n";
  for (const auto& r : rows)
    os << r.method << ',' << number(r.rmseHu) << ',' << number(r.priorRmseHu)
       << ',' << number(r.fbpRmseHu) << ',' << number(r.measuredResidualRms)
       << ',' << number(r.measuredResidualMaxAbs) << ','
       << number(r.measuredFractionAboveE1) << ',' << r.iterations << '\n';
  return os.str();
}

std::string summaryJson(const ExperimentConfig& config,
                        const RunSummary& s) {
  auto num = [](double v) -> json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  json j;
  j["config"] = toJson(config);
  j["metrics"] = {{"method", s.method},
                  {"rmse_hu", num(s.rmseHu)},
                  {"prior_rmse_hu", num(s.priorRmseHu)},
                  {"fbp_rmse_hu", num(s.fbpRmseHu)},
                  {"measured_residual_rms", num(s.measuredResidualRms)},
                  {"measured_residual_max_abs", num(s.measuredResidualMaxAbs)},
                  {"measured_fraction_above_e1", num(s.measuredFractionAboveE1)},
                  {"iterations", s.iterations}};
  return j.dump(2) + "\n";
}

}  // namespace dcar
