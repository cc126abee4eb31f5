# Package init for form ring algebra utilities
