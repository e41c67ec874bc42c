#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "prodyn/mesh.hpp"

namespace prodyn {

namespace {

constexpr char kBinaryMagic[4] = {'P', 'D', 'V', 'M'};
constexpr std::int32_t kBinaryVersion = 1;

std::string lowerExtension(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(c));
  return ext;
}

// Strips comments ('#' to end of line) and returns whitespace tokens.
std::vector<std::string> tokenizeFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw configError("cannot open " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  return tokens;
}

class TokenReader {
 public:
  TokenReader(std::vector<std::string> tokens, std::string path)
      : tokens_(std::move(tokens)), path_(std::move(path)) {}

  long nextInt() {
    const std::string& t = next();
    try {
      return std::stol(t);
    } catch (...) {
      throw configError(path_ + ": expected integer, got '" + t + "'");
    }
  }
  double nextDouble() {
    const std::string& t = next();
    try {
      return std::stod(t);
    } catch (...) {
      throw configError(path_ + ": expected number, got '" + t + "'");
    }
  }

 private:
  const std::string& next() {
    if (pos_ >= tokens_.size()) throw configError(path_ + ": unexpected end of file");
    return tokens_[pos_++];
  }
  std::vector<std::string> tokens_;
  std::string path_;
  size_t pos_ = 0;
};

SimplicialMesh loadNodeEle(const std::string& nodePath) {
  std::string elePath = nodePath;
  const auto dot = elePath.rfind(".node");
  if (dot == std::string::npos) throw configError("expected .node path: " + nodePath);
  elePath.replace(dot, 5, ".ele");

  TokenReader node(tokenizeFile(nodePath), nodePath);
  const long nV = node.nextInt();
  const long dim = node.nextInt();
  const long nAttr = node.nextInt();
  const long nMark = node.nextInt();
  if (dim != 2 && dim != 3) throw configError(nodePath + ": dim must be 2 or 3");
  if (nV <= 0) throw configError(nodePath + ": no vertices");

  SimplicialMesh mesh;
  mesh.dim = static_cast<int>(dim);
  mesh.rest.resize(dim, nV);
  long firstNodeIndex = 0;
  for (long i = 0; i < nV; ++i) {
    const long idx = node.nextInt();
    if (i == 0) firstNodeIndex = idx;
    const long row = idx - firstNodeIndex;
    if (row < 0 || row >= nV) throw configError(nodePath + ": bad vertex index");
    for (long k = 0; k < dim; ++k) mesh.rest(k, row) = node.nextDouble();
    for (long k = 0; k < nAttr + nMark; ++k) node.nextDouble();
  }

  TokenReader ele(tokenizeFile(elePath), elePath);
  const long nE = ele.nextInt();
  const long arity = ele.nextInt();
  const long nEAttr = ele.nextInt();
  if (arity != dim + 1)
    throw configError(elePath + ": expected " + std::to_string(dim + 1) + " nodes per element");
  mesh.elements.resize(arity, nE);
  long firstEleIndex = 0;
  for (long e = 0; e < nE; ++e) {
    const long idx = ele.nextInt();
    if (e == 0) firstEleIndex = idx;
    const long col = idx - firstEleIndex;
    if (col < 0 || col >= nE) throw configError(elePath + ": bad element index");
    for (long k = 0; k < arity; ++k) {
      const long v = ele.nextInt() - firstNodeIndex;
      mesh.elements(k, col) = static_cast<int>(v);
    }
    for (long k = 0; k < nEAttr; ++k) ele.nextDouble();
  }
  return mesh;
}

SimplicialMesh loadObj2D(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw configError("cannot open " + path);
  std::vector<double> xs, ys, zs;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z = 0.0;
      if (!(ls >> x >> y)) throw configError(path + ": bad vertex line");
      ls >> z;
      xs.push_back(x);
      ys.push_back(y);
      zs.push_back(z);
    } else if (tag == "f") {
      std::array<int, 3> f;
      for (int k = 0; k < 3; ++k) {
        std::string ref;
        if (!(ls >> ref)) throw configError(path + ": face with fewer than 3 vertices");
        f[k] = std::stoi(ref.substr(0, ref.find('/'))) - 1;  // OBJ is 1-based
      }
      std::string extra;
      if (ls >> extra) throw configError(path + ": only triangle faces are supported");
      faces.push_back(f);
    }
  }
  for (double z : zs)
    if (z != 0.0) throw configError(path + ": OBJ meshes must be planar (z == 0) for 2D use");

  SimplicialMesh mesh;
  mesh.dim = 2;
  mesh.rest.resize(2, static_cast<long>(xs.size()));
  for (size_t i = 0; i < xs.size(); ++i) {
    mesh.rest(0, static_cast<long>(i)) = xs[i];
    mesh.rest(1, static_cast<long>(i)) = ys[i];
  }
  mesh.elements.resize(3, static_cast<long>(faces.size()));
  for (size_t f = 0; f < faces.size(); ++f)
    for (int k = 0; k < 3; ++k) mesh.elements(k, static_cast<long>(f)) = faces[f][k];
  return mesh;
}

template <typename T>
void writeRaw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T readRaw(std::ifstream& in, const std::string& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw configError(path + ": truncated binary mesh");
  return value;
}

SimplicialMesh loadBinary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw configError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kBinaryMagic, 4) != 0)
    throw configError(path + ": not a binary mesh dump");
  const auto version = readRaw<std::int32_t>(in, path);
  if (version != kBinaryVersion) throw configError(path + ": unsupported version");
  SimplicialMesh mesh;
  mesh.dim = readRaw<std::int32_t>(in, path);
  mesh.level_id = readRaw<std::int32_t>(in, path);
  const auto nV = readRaw<std::int64_t>(in, path);
  const auto nE = readRaw<std::int64_t>(in, path);
  if (nV < 0 || nE < 0) throw configError(path + ": corrupt header");
  mesh.rest.resize(mesh.dim, nV);
  in.read(reinterpret_cast<char*>(mesh.rest.data()),
          static_cast<std::streamsize>(sizeof(double) * mesh.dim * nV));
  mesh.elements.resize(mesh.dim + 1, nE);
  in.read(reinterpret_cast<char*>(mesh.elements.data()),
          static_cast<std::streamsize>(sizeof(int) * (mesh.dim + 1) * nE));
  if (!in) throw configError(path + ": truncated binary mesh");
  return mesh;
}

}  // namespace

SimplicialMesh loadMesh(const std::string& path, MeshFormat format, MeshLoadReport* report) {
  if (format == MeshFormat::kAuto) {
    const std::string ext = lowerExtension(path);
    if (ext == ".node" || ext == ".ele")
      format = MeshFormat::kNodeEle;
    else if (ext == ".obj")
      format = MeshFormat::kObj2D;
    else if (ext == ".vmesh")
      format = MeshFormat::kBinary;
    else
      throw configError("unknown mesh extension: " + path);
  }
  SimplicialMesh mesh;
  switch (format) {
    case MeshFormat::kNodeEle: mesh = loadNodeEle(path); break;
    case MeshFormat::kObj2D: mesh = loadObj2D(path); break;
    case MeshFormat::kBinary: mesh = loadBinary(path); break;
    default: throw configError("bad mesh format");
  }
  validateMesh(mesh, report);
  return mesh;
}

void saveMeshBinary(const SimplicialMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw configError("cannot write " + path);
  out.write(kBinaryMagic, 4);
  writeRaw(out, kBinaryVersion);
  writeRaw(out, static_cast<std::int32_t>(mesh.dim));
  writeRaw(out, static_cast<std::int32_t>(mesh.level_id));
  writeRaw(out, static_cast<std::int64_t>(mesh.numVertices()));
  writeRaw(out, static_cast<std::int64_t>(mesh.numElements()));
  out.write(reinterpret_cast<const char*>(mesh.rest.data()),
            static_cast<std::streamsize>(sizeof(double) * mesh.rest.size()));
  out.write(reinterpret_cast<const char*>(mesh.elements.data()),
            static_cast<std::streamsize>(sizeof(int) * mesh.elements.size()));
  if (!out) throw configError("write failed: " + path);
}

void saveMeshNodeEle(const SimplicialMesh& mesh, const std::string& nodePath) {
  std::string elePath = nodePath;
  const auto dot = elePath.rfind(".node");
  if (dot == std::string::npos) throw configError("expected .node path: " + nodePath);
  elePath.replace(dot, 5, ".ele");

  std::ofstream node(nodePath);
  if (!node) throw configError("cannot write " + nodePath);
  node.precision(17);
  node << mesh.numVertices() << " " << mesh.dim << " 0 0\n";
  for (int v = 0; v < mesh.numVertices(); ++v) {
    node << v;
    for (int k = 0; k < mesh.dim; ++k) node << " " << mesh.rest(k, v);
    node << "\n";
  }

  std::ofstream ele(elePath);
  if (!ele) throw configError("cannot write " + elePath);
  ele << mesh.numElements() << " " << mesh.dim + 1 << " 0\n";
  for (int e = 0; e < mesh.numElements(); ++e) {
    ele << e;
    for (int k = 0; k <= mesh.dim; ++k) ele << " " << mesh.elements(k, e);
    ele << "\n";
  }
}

void saveMeshObj2D(const SimplicialMesh& mesh, const std::string& path) {
  if (mesh.dim != 2) throw configError("saveMeshObj2D: mesh is not 2D");
  std::ofstream out(path);
  if (!out) throw configError("cannot write " + path);
  out.precision(17);
  for (int v = 0; v < mesh.numVertices(); ++v)
    out << "v " << mesh.rest(0, v) << " " << mesh.rest(1, v) << " 0\n";
  for (int e = 0; e < mesh.numElements(); ++e)
    out << "f " << mesh.elements(0, e) + 1 << " " << mesh.elements(1, e) + 1 << " "
        << mesh.elements(2, e) + 1 << "\n";
}

}  // namespace prodyn
