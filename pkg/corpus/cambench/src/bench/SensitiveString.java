package bench;

import java.security.MessageDigest;

public class SensitiveString {

    public byte[] tokenHash(String user) throws Exception {
        String password = "hunter2";
        String token = user + ":" + password;
        MessageDigest md = MessageDigest.getInstance("SHA-256");
        return md.digest(token.getBytes());
    }
}
