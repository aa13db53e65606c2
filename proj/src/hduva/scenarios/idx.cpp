#include "hduva/scenarios/idx.hpp"

#include <fstream>

#include "hduva/core/errors.hpp"

namespace hduva::scen {
namespace {

std::uint32_t read_u32_be(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return (static_cast<std::uint32_t>(b[0]) << 24) |
         (static_cast<std::uint32_t>(b[1]) << 16) |
         (static_cast<std::uint32_t>(b[2]) << 8) | b[3];
}

void write_u32_be(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

IdxCorpus read_idx(const std::string& images_path,
                   const std::string& labels_path) {
  std::ifstream imgs(images_path, std::ios::binary);
  if (!imgs) throw io_error("missing IDX image file: " + images_path);
  std::ifstream labs(labels_path, std::ios::binary);
  if (!labs) throw io_error("missing IDX label file: " + labels_path);

  if (read_u32_be(imgs) != 0x00000803u)
    throw io_error("bad IDX image magic: " + images_path);
  const std::uint32_t n = read_u32_be(imgs);
  const std::uint32_t rows = read_u32_be(imgs);
  const std::uint32_t cols = read_u32_be(imgs);
  if (read_u32_be(labs) != 0x00000801u)
    throw io_error("bad IDX label magic: " + labels_path);
  if (read_u32_be(labs) != n)
    throw io_error("IDX image/label count mismatch: " + labels_path);

  IdxCorpus c;
  c.rows = static_cast<int>(rows);
  c.cols = static_cast<int>(cols);
  c.images.reserve(n);
  c.labels.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Image img(1, c.rows, c.cols);
    imgs.read(reinterpret_cast<char*>(img.px.data()),
              static_cast<std::streamsize>(img.px.size()));
    c.images.push_back(std::move(img));
    char l = 0;
    labs.read(&l, 1);
    c.labels.push_back(static_cast<int>(static_cast<unsigned char>(l)));
  }
  if (!imgs || !labs) throw io_error("truncated IDX corpus: " + images_path);
  return c;
}

void write_idx(const IdxCorpus& corpus, const std::string& images_path,
               const std::string& labels_path) {
  std::ofstream imgs(images_path, std::ios::binary);
  if (!imgs) throw io_error("cannot write IDX images: " + images_path);
  std::ofstream labs(labels_path, std::ios::binary);
  if (!labs) throw io_error("cannot write IDX labels: " + labels_path);
  write_u32_be(imgs, 0x00000803u);
  write_u32_be(imgs, static_cast<std::uint32_t>(corpus.images.size()));
  write_u32_be(imgs, static_cast<std::uint32_t>(corpus.rows));
  write_u32_be(imgs, static_cast<std::uint32_t>(corpus.cols));
  write_u32_be(labs, 0x00000801u);
  write_u32_be(labs, static_cast<std::uint32_t>(corpus.labels.size()));
  for (std::size_t i = 0; i < corpus.images.size(); ++i) {
    imgs.write(reinterpret_cast<const char*>(corpus.images[i].px.data()),
               static_cast<std::streamsize>(corpus.images[i].px.size()));
    const char l = static_cast<char>(corpus.labels[i]);
    labs.write(&l, 1);
  }
  if (!imgs || !labs) throw io_error("IDX write failed: " + images_path);
}

}  // namespace hduva::scen
