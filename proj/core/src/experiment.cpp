namespace fairassign {}
