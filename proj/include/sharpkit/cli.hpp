#pragma once

// Command-line front end: train / sweep / investigate / spectrum / plot.
// Exit codes: 0 success, 1 usage/config/I-O error, 2 numerical divergence.

namespace sharpkit::cli {

int run(int argc, const char* const* argv);

}  // namespace sharpkit::cli
