// Joint positions, the tip Jacobian and obstacle clearance of a 3-link arm.

use std::error::Error;

use hiro::kinematics::{forward_kinematics, min_clearance, point_jacobian, ArmModel, CircleObstacle, JointConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let arm = ArmModel::new(vec![0.4, 0.3, 0.2])?.with_link_radius(0.02)?;
    let q = JointConfig::new(vec![0.3, -0.6, 0.9]);

    let joints = forward_kinematics(&arm, &q)?;
    for (i, p) in joints.iter().enumerate() {
        println!("joint {i}: ({:+.4}, {:+.4})", p.x, p.y);
    }
    let tip = joints[joints.len() - 1];
    println!("reach {:.2}, tip distance {:.4}", arm.reach(), tip.norm());
    assert!(tip.norm() <= arm.reach() + 1e-12);

    let jac = point_jacobian(&arm, &q, arm.dof() - 1, tip)?;
    println!("tip Jacobian:\n{jac:.4}");

    // Compare the Jacobian with a finite difference on the last joint.
    let h = 1e-6;
    let mut qh = q.clone();
    qh.as_mut_slice()[2] += h;
    let tip_h = forward_kinematics(&arm, &qh)?[3];
    let fd = (tip_h - tip) / h;
    assert!((fd - jac.column(2)).norm() < 1e-5);

    let obstacles = [CircleObstacle::new(0.5, 0.5, 0.1), CircleObstacle::new(0.2, -0.6, 0.08)];
    let clearance = min_clearance(&arm, &q, &obstacles)?;
    println!("clearance to {} obstacles: {clearance:.4}", obstacles.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
