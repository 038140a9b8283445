#include "airi/denoiser/model_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "airi/errors.hpp"

namespace airi::denoiser {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const char* const kKnownKeys[] = {"version", "layers", "sigma", "a", "loss", "kappa",
                                  "epsilon", "residual_skip", "checksum-sha256"};

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

void append_float(std::vector<unsigned char>& out, double value) {
  const auto f = static_cast<float>(value);
  const std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(f));
  unsigned char b[4];
  std::memcpy(b, &bits, 4);
  out.insert(out.end(), b, b + 4);
}

double read_float(const unsigned char* p) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  return static_cast<double>(std::bit_cast<float>(to_little(bits)));
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

template <class T>
T get_field(const json& j, const char* key, const fs::path& path) {
  if (!j.contains(key)) throw ValidationError(path.string() + ": missing manifest key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": bad value for '" + key + "': " + e.what());
  }
}

std::vector<unsigned char> encode_weights(const std::vector<ConvLayer>& layers) {
  std::vector<unsigned char> blob;
  blob.reserve(weight_bytes(layers));
  for (const ConvLayer& l : layers) {
    for (double w : l.kernel) append_float(blob, w);
    for (double b : l.bias) append_float(blob, b);
  }
  return blob;
}

json image_rows(const std::vector<Image>& images) {
  json arr = json::array();
  for (const Image& img : images) arr.push_back(img.values());
  return arr;
}

std::vector<Image> parse_images(const json& arr, std::size_t rows, std::size_t cols,
                                const std::string& what) {
  std::vector<Image> out;
  for (const json& v : arr) {
    auto values = v.get<std::vector<double>>();
    if (values.size() != rows * cols) {
      throw ValidationError("reference " + what + " vector has " + std::to_string(values.size()) +
                            " entries, expected " + std::to_string(rows * cols));
    }
    out.emplace_back(rows, cols, std::move(values));
  }
  return out;
}

}  // namespace

std::size_t weight_bytes(const std::vector<ConvLayer>& layers) {
  std::size_t n = 0;
  for (const ConvLayer& l : layers) n += l.out * l.in * l.kh * l.kw + l.out;
  return 4 * n;
}

std::string sha256_hex(const std::vector<unsigned char>& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 computation failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

ModelFile load_model(const fs::path& manifest_or_dir) {
  const fs::path manifest_path =
      fs::is_directory(manifest_or_dir) ? manifest_or_dir / kManifestFile : manifest_or_dir;
  std::ifstream in(manifest_path);
  if (!in) throw ValidationError("cannot open model manifest " + manifest_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(manifest_path.string() + ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) throw ValidationError(manifest_path.string() + ": manifest must be an object");

  ModelFile model;
  model.version = get_field<int>(j, "version", manifest_path);
  if (model.version != kManifestVersion) {
    throw ValidationError("unsupported manifest version " + std::to_string(model.version));
  }
  model.info.sigma = get_field<double>(j, "sigma", manifest_path);
  model.info.a = get_field<double>(j, "a", manifest_path);
  model.info.loss = get_field<std::string>(j, "loss", manifest_path);
  model.info.kappa = get_field<double>(j, "kappa", manifest_path);
  model.info.epsilon = get_field<double>(j, "epsilon", manifest_path);
  model.info.residual_skip = get_field<bool>(j, "residual_skip", manifest_path);
  if (!(model.info.sigma > 0.0)) throw ValidationError("manifest sigma must be positive");

  const json& layers = j.contains("layers") ? j.at("layers") : json();
  if (!layers.is_array()) throw ValidationError(manifest_path.string() + ": 'layers' must be a list");
  for (const json& lj : layers) {
    ConvLayer l;
    l.out = get_field<std::size_t>(lj, "out", manifest_path);
    l.in = get_field<std::size_t>(lj, "in", manifest_path);
    l.kh = get_field<std::size_t>(lj, "kh", manifest_path);
    l.kw = get_field<std::size_t>(lj, "kw", manifest_path);
    l.activation = activation_from_string(get_field<std::string>(lj, "activation", manifest_path));
    l.kernel.assign(l.out * l.in * l.kh * l.kw, 0.0);
    l.bias.assign(l.out, 0.0);
    model.layers.push_back(std::move(l));
  }
  validate_architecture(model.layers);

  const fs::path weights_path = manifest_path.parent_path() / kWeightsFile;
  const std::vector<unsigned char> blob = read_bytes(weights_path);
  const std::size_t expected = weight_bytes(model.layers);
  if (blob.size() != expected) {
    throw ValidationError("checksum error: " + weights_path.string() + " has " +
                          std::to_string(blob.size()) + " bytes, manifest expects " +
                          std::to_string(expected) + " bytes");
  }
  const std::string want = get_field<std::string>(j, "checksum-sha256", manifest_path);
  const std::string got = sha256_hex(blob);
  if (want != got) {
    throw ValidationError("checksum error: " + weights_path.string() + " sha256 " + got +
                          " does not match manifest " + want);
  }

  const unsigned char* p = blob.data();
  for (ConvLayer& l : model.layers) {
    for (double& w : l.kernel) { w = read_float(p); p += 4; }
    for (double& b : l.bias) { b = read_float(p); p += 4; }
    for (double w : l.kernel) {
      if (!std::isfinite(w)) throw ValidationError("non-finite weight in " + weights_path.string());
    }
    for (double b : l.bias) {
      if (!std::isfinite(b)) throw ValidationError("non-finite bias in " + weights_path.string());
    }
  }

  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kKnownKeys), std::end(kKnownKeys), key) == std::end(kKnownKeys)) {
      model.extra[key] = value;
    }
  }
  return model;
}

fs::path save_model(const ModelFile& model, const fs::path& dir) {
  validate_architecture(model.layers);
  fs::create_directories(dir);
  const std::vector<unsigned char> blob = encode_weights(model.layers);

  json j = model.extra.is_object() ? model.extra : json::object();
  j["version"] = model.version;
  j["sigma"] = model.info.sigma;
  j["a"] = model.info.a;
  j["loss"] = model.info.loss;
  j["kappa"] = model.info.kappa;
  j["epsilon"] = model.info.epsilon;
  j["residual_skip"] = model.info.residual_skip;
  j["checksum-sha256"] = sha256_hex(blob);
  json layers = json::array();
  for (const ConvLayer& l : model.layers) {
    layers.push_back({{"out", l.out}, {"in", l.in}, {"kh", l.kh}, {"kw", l.kw},
                      {"activation", to_string(l.activation)}});
  }
  j["layers"] = std::move(layers);

  {
    std::ofstream out(dir / kWeightsFile, std::ios::binary);
    out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
    if (!out) throw ValidationError("cannot write " + (dir / kWeightsFile).string());
  }
  const fs::path manifest_path = dir / kManifestFile;
  std::ofstream out(manifest_path);
  out << j.dump(2) << '\n';
  if (!out) throw ValidationError("cannot write " + manifest_path.string());
  return manifest_path;
}

std::shared_ptr<CnnDenoiser> make_denoiser(const ModelFile& model) {
  return std::make_shared<CnnDenoiser>(model.layers, model.info);
}

ReferenceVectors make_reference_vectors(const Denoiser& d, const std::vector<Image>& inputs) {
  ReferenceVectors ref;
  if (inputs.empty()) throw ValidationError("reference vectors need at least one input");
  ref.rows = inputs.front().rows();
  ref.cols = inputs.front().cols();
  for (const Image& x : inputs) {
    require_same_shape(inputs.front(), x, "reference inputs");
    ref.inputs.push_back(x);
    ref.outputs.push_back(d.apply(x));
  }
  return ref;
}

void save_reference_vectors(const ReferenceVectors& ref, const fs::path& path) {
  json j = {{"rows", ref.rows},
            {"cols", ref.cols},
            {"inputs", image_rows(ref.inputs)},
            {"outputs", image_rows(ref.outputs)}};
  std::ofstream out(path);
  out << j.dump() << '\n';
  if (!out) throw ValidationError("cannot write " + path.string());
}

ReferenceVectors load_reference_vectors(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open reference vectors " + path.string());
  try {
    const json j = json::parse(in);
    ReferenceVectors ref;
    ref.rows = j.at("rows").get<std::size_t>();
    ref.cols = j.at("cols").get<std::size_t>();
    ref.inputs = parse_images(j.at("inputs"), ref.rows, ref.cols, "input");
    ref.outputs = parse_images(j.at("outputs"), ref.rows, ref.cols, "output");
    if (ref.inputs.size() != ref.outputs.size()) {
      throw ValidationError("reference file has " + std::to_string(ref.inputs.size()) +
                            " inputs but " + std::to_string(ref.outputs.size()) + " outputs");
    }
    return ref;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": malformed reference vectors: " + e.what());
  }
}

double reference_max_error(const Denoiser& d, const ReferenceVectors& ref) {
  double worst = 0.0;
  for (std::size_t k = 0; k < ref.inputs.size(); ++k) {
    const Image y = d.apply(ref.inputs[k]);
    for (std::size_t j = 0; j < y.size(); ++j) {
      worst = std::max(worst, std::abs(y[j] - ref.outputs[k][j]));
    }
  }
  return worst;
}

}  // namespace airi::denoiser
