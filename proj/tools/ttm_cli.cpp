#include "ttm/pipeline.hpp"

int main(int argc, char** argv) {
    return ttm::pipeline::run_cli(argc, argv);
}
