// Stand-alone reference model executable: vfab_refmodel MODEL input.pgm attrs.txt output.pgm
#include <fstream>
#include <iostream>
#include <string>

#include "vfab/check/refmodel.hpp"

int main(int argc, char** argv) {
  using namespace vfab::check;
  if (argc != 5) {
    std::cerr << "usage: vfab_refmodel ganc|thr INPUT.pgm ATTRS.txt OUTPUT.pgm\n";
    return 2;
  }
  const std::string which = argv[1];
  auto model = which == "ganc" ? ganc_model() : which == "thr" ? thr_model() : nullptr;
  if (!model) {
    std::cerr << "unknown model " << which << "\n";
    return 2;
  }
  try {
    std::ifstream in(argv[2], std::ios::binary);
    std::ifstream at(argv[3]);
    if (!in || !at) throw std::runtime_error("cannot open inputs");
    const auto frame = read_pgm(in);
    const auto attrs = read_attrs(at);
    std::ofstream out(argv[4], std::ios::binary);
    write_pgm(out, run_reference(*model, frame, attrs));
  } catch (const std::exception& e) {
    std::cerr << "vfab_refmodel: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
