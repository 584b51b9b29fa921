"""Structure-preserving mixed finite element solver for steady MHD kinematics."""
