# commands: one click command per CLI subcommand
