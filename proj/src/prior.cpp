#include "dcar/prior.hpp"

#include "dcar/errors.hpp"
#include "dcar/fbp.hpp"
#include "dcar/io.hpp"

namespace dcar {

PriorKind parsePriorKind(const std::string& name) {
  if (name == "file") return PriorKind::File;
  if (name == "zero") return PriorKind::Zero;
  if (name == "limited-fbp") return PriorKind::LimitedFbp;
  if (name == "oracle-corrupted") return PriorKind::OracleCorrupted;
  throw ValidationError("unknown prior kind '" + name + "'");
}

std::string priorKindName(PriorKind kind) {
  switch (kind) {
    case PriorKind::File: return "file";
    case PriorKind::Zero: return "zero";
    case PriorKind::LimitedFbp: return "limited-fbp";
    case PriorKind::OracleCorrupted: return "oracle-corrupted";
  }
  return "unknown";
}

ImageGrid resolvePrior(const PriorSource& source, const PriorContext& context) {
  context.grid.validate();
  switch (source.kind) {
    case PriorKind::Zero:
      return ImageGrid(context.grid);

    case PriorKind::File: {
      ImageGrid image = io::readImage(source.path, context.scale);
      if (!(image.spec() == context.grid))
        throw ValidationError("prior file " + source.path +
                              " does not match the reconstruction grid");
      if (!image.allFinite())
        throw ValidationError("prior file " + source.path +
                              " contains non-finite values");
      return image;
    }

    case PriorKind::LimitedFbp:
      if (!context.measured || !context.geometry || !context.partition)
        throw ValidationError(
            "limited-fbp prior needs measured data and geometry");
      return fbpReconstruct(*context.measured, *context.geometry,
                            context.partition->measured, context.grid);

    case PriorKind::OracleCorrupted: {
      if (!context.groundTruth)
        throw ValidationError("oracle-corrupted prior needs a ground truth");
      if (!(context.groundTruth->spec() == context.grid))
        throw ValidationError("ground truth does not match the grid");
      ImageGrid image = *context.groundTruth;
      std::vector<EllipseSpec> perturbation;
      for (const Corruption& c : source.corruptions)
        perturbation.push_back({c.cx, c.cy, c.ax, c.ay, c.rotationDeg,
                                context.scale.deltaToMu(c.offsetHu)});
      const ImageGrid delta = renderPhantom(perturbation, context.grid);
      for (std::size_t i = 0; i < image.size(); ++i) image[i] += delta[i];
      return image;
    }
  }
  throw ValidationError("unhandled prior kind");
}

}  // namespace dcar
