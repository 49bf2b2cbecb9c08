#include "app.hpp"

int main(int argc, char** argv) { return nmixprev::cli::run(argc, argv); }
