#include "image/codec.hpp"

#include <png.h>
#include <jpeglib.h>

#include <algorithm>
#include <csetjmp>
#include <cstring>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "common/fsutil.hpp"

namespace inpaint_lab {

namespace {

struct DecodedPng {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> rgb;  // HWC, 3 channels
};

DecodedPng decode_png(const std::string& bytes, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    fail_runtime("PNG decode failed for " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  DecodedPng out;
  out.height = static_cast<int>(image.height);
  out.width = static_cast<int>(image.width);
  out.rgb.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.rgb.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail_runtime("PNG decode failed for " + path.string() + ": " + msg);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

ImageU8 decode_jpeg(const std::string& bytes, const std::filesystem::path& path) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_exit;
  // Nothing with a destructor may live between setjmp and the longjmp target.
  std::vector<std::uint8_t> pixels;
  int height = 0;
  int width = 0;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    fail_runtime("JPEG decode failed for " + path.string() + ": " + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, reinterpret_cast<const unsigned char*>(bytes.data()),
               static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  height = static_cast<int>(cinfo.output_height);
  width = static_cast<int>(cinfo.output_width);
  pixels.resize(static_cast<std::size_t>(height) * width * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  ImageU8 out(height, width);
  out.data() = std::move(pixels);
  return out;
}

bool is_png(const std::string& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0;
}

bool is_jpeg(const std::string& bytes) {
  return bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xFF &&
         static_cast<unsigned char>(bytes[1]) == 0xD8 && static_cast<unsigned char>(bytes[2]) == 0xFF;
}

void write_png_buffer(const std::filesystem::path& path, png_image& image, const void* buffer,
                      std::ptrdiff_t row_stride) {
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, buffer, static_cast<png_int_32>(row_stride),
                                 nullptr))
    fail_runtime("PNG encode failed for " + path.string() + ": " + image.message);
  std::vector<unsigned char> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, buffer,
                                 static_cast<png_int_32>(row_stride), nullptr))
    fail_runtime("PNG encode failed for " + path.string() + ": " + image.message);
  out.resize(size);
  write_file_atomic(path, out);
}

}  // namespace

ImageU8 read_image(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (is_png(bytes)) {
    DecodedPng d = decode_png(bytes, path);
    ImageU8 out(d.height, d.width);
    out.data() = std::move(d.rgb);
    return out;
  }
  if (is_jpeg(bytes)) return decode_jpeg(bytes, path);
  fail_runtime("unrecognized image format: " + path.string());
}

void write_png(const std::filesystem::path& path, const ImageU8& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  write_png_buffer(path, image, img.data().data(), img.width() * 3);
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  // The simplified libpng API has no 1-bit output, so use the classic one.
  struct Sink {
    std::vector<unsigned char> bytes;
  } sink;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail_runtime("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail_runtime("png_create_info_struct failed");
  }
  const int w = mask.width();
  std::vector<std::vector<png_byte>> rows(mask.height(), std::vector<png_byte>((w + 7) / 8, 0));
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < w; ++x)
      if (mask.at(y, x)) rows[y][x / 8] |= static_cast<png_byte>(0x80 >> (x % 8));
  std::vector<png_bytep> row_ptrs(mask.height());
  for (int y = 0; y < mask.height(); ++y) row_ptrs[y] = rows[y].data();

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail_runtime("PNG encode failed for " + path.string());
  }
  png_set_write_fn(
      png, &sink,
      [](png_structp p, png_bytep data, png_size_t len) {
        auto* s = static_cast<Sink*>(png_get_io_ptr(p));
        s->bytes.insert(s->bytes.end(), data, data + len);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(mask.height()), 1,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  write_file_atomic(path, sink.bytes);
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (!is_png(bytes)) fail_runtime("mask is not a PNG: " + path.string());
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    fail_runtime("PNG decode failed for " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> gray(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, gray.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail_runtime("PNG decode failed for " + path.string() + ": " + msg);
  }
  BinaryMask mask(static_cast<int>(image.height), static_cast<int>(image.width));
  std::transform(gray.begin(), gray.end(), mask.data().begin(),
                 [](std::uint8_t g) { return static_cast<std::uint8_t>(g >= 128 ? 1 : 0); });
  return mask;
}

bool has_image_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace inpaint_lab
