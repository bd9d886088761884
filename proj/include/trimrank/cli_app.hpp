#pragma once

namespace trimrank {

int run_cli(int argc, char** argv);

}  // namespace trimrank
